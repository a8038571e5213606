//! Command-line front end. `run` parses arguments, dispatches, and returns
//! the process exit code:
//!
//! * 0: success
//! * 1: nonconformance to an `--expect`ed type, an inconsistent manifest,
//!   or no conversion path
//! * 2: usage error
//! * 3: unreadable or malformed input data

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::annotator::{cross_check, emit_turtle, load_manifest, validate_usages, ManifestError};
use crate::classifier::{classify_path, ClassifierConfig, ClassifyError};
use crate::converter::{convert_iter, element_kind_of, ConvertError, StreamIter};
use crate::io::{
    open_flat, open_grouped, write_flat_stream, DirWriter, ElementKind, Framing, FramedWriter,
    ReadError, WriteError,
};
use crate::model::{Element, Iri, Statement};
use crate::taxonomy::{
    default_taxonomy, infer_closure, load_taxonomy, InferredTaxonomy, Policy, Relation, Taxonomy,
    TaxonomyError,
};

pub const TAXONOMY_ENV: &str = "STAX_TAXONOMY";

#[derive(Debug, Parser)]
#[command(name = "stax-kit", version, about = "Classify, convert and annotate RDF streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a stream against every applicable concrete stream type.
    Classify(ClassifyArgs),
    /// Convert a stream between stream types.
    Convert(ConvertArgs),
    /// Query the stream type taxonomy.
    #[command(subcommand)]
    Taxonomy(TaxonomyCommand),
    /// Render a usage manifest as Turtle.
    Annotate(AnnotateArgs),
    /// Check a usage manifest for consistency, optionally against data.
    Validate(ValidateArgs),
}

fn framing_parser() -> impl TypedValueParser<Value = Framing> {
    PossibleValuesParser::new(Framing::ALL.map(Framing::name))
        .map(|s| s.parse::<Framing>().expect("listed framing"))
}

fn policy_parser() -> impl TypedValueParser<Value = Policy> {
    PossibleValuesParser::new(["strict", "transitive"])
        .map(|s| s.parse::<Policy>().expect("listed policy"))
}

#[derive(Debug, Args)]
struct ClassifierFlags {
    /// Timestamp predicate IRI (repeatable). Defaults to prov:generatedAtTime.
    #[arg(long = "timestamp-predicate", value_name = "IRI")]
    timestamp_predicates: Vec<String>,
    /// Do not check that timestamps are non-decreasing.
    #[arg(long)]
    no_order_check: bool,
}

impl ClassifierFlags {
    fn config(&self) -> Result<ClassifierConfig, Failure> {
        let mut cfg = ClassifierConfig {
            check_timestamp_order: !self.no_order_check,
            ..ClassifierConfig::default()
        };
        if !self.timestamp_predicates.is_empty() {
            cfg.timestamp_predicates = self
                .timestamp_predicates
                .iter()
                .map(|p| Iri::new(p.clone()).map_err(|e| Failure::usage(e.to_string())))
                .collect::<Result<_, _>>()?;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Input file, directory, or `-` for standard input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = framing_parser())]
    framing: Framing,
    #[command(flatten)]
    classifier: ClassifierFlags,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Exit with status 1 unless the stream conforms to TYPE (repeatable).
    #[arg(long, value_name = "TYPE")]
    expect: Vec<String>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output file, directory, or `-` for standard output.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_name = "TYPE")]
    from: String,
    #[arg(long, value_name = "TYPE")]
    to: String,
    #[arg(long, value_parser = policy_parser(), default_value = "strict")]
    policy: Policy,
    /// Statements per element when grouping.
    #[arg(long, default_value_t = 1)]
    batch_size: usize,
    /// Defaults to the framed or flat framing for the source type.
    #[arg(long, value_parser = framing_parser())]
    input_framing: Option<Framing>,
    /// Defaults to the framed or flat framing for the target type.
    #[arg(long, value_parser = framing_parser())]
    output_framing: Option<Framing>,
}

#[derive(Debug, Subcommand)]
enum TaxonomyCommand {
    /// Print whether FROM is related to TO by REL in the inferred taxonomy;
    /// exits 1 when it is not.
    Relate {
        relation: Relation,
        from: String,
        to: String,
    },
    /// Print every inferred pair of every relation.
    Closure {
        #[arg(long)]
        json: bool,
    },
    /// Print the conversion steps from FROM to TO.
    Path {
        from: String,
        to: String,
        #[arg(long, value_parser = policy_parser(), default_value = "strict")]
        policy: Policy,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct AnnotateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Write the Turtle here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Data to cross-check the declared usages against.
    #[arg(long, requires = "framing")]
    data: Option<PathBuf>,
    #[arg(long, value_parser = framing_parser(), requires = "data")]
    framing: Option<Framing>,
    #[arg(long, value_parser = policy_parser(), default_value = "strict")]
    policy: Policy,
    #[command(flatten)]
    classifier: ClassifierFlags,
    #[arg(long)]
    json: bool,
}

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn negative(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<ReadError> for Failure {
    fn from(e: ReadError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<WriteError> for Failure {
    fn from(e: WriteError) -> Self {
        Failure::data(e.to_string())
    }
}

impl From<TaxonomyError> for Failure {
    fn from(e: TaxonomyError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<ManifestError> for Failure {
    fn from(e: ManifestError) -> Self {
        Failure::data(format!("manifest: {e}"))
    }
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::NoTimestampPredicates => Failure::usage(e.to_string()),
            ClassifyError::FramingMismatch { .. } | ClassifyError::Read(_) => {
                Failure::data(e.to_string())
            }
        }
    }
}

impl From<ConvertError> for Failure {
    fn from(e: ConvertError) -> Self {
        match e {
            ConvertError::NoConversionPath { .. } => Failure::negative(e.to_string()),
            ConvertError::Read(_) | ConvertError::NamedGraphPresent(_) => {
                Failure::data(e.to_string())
            }
            _ => Failure::usage(e.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let target: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = target.write_all(rendered.as_bytes());
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "stax-kit: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    let taxonomy = load_configured_taxonomy()?;
    let it = infer_closure(&taxonomy);
    match command {
        Command::Classify(a) => classify(a, &it, out),
        Command::Convert(a) => convert(a, &it, out),
        Command::Taxonomy(c) => taxonomy_query(c, &it, out),
        Command::Annotate(a) => annotate(a, &taxonomy, out),
        Command::Validate(a) => validate(a, &it, out),
    }
}

fn load_configured_taxonomy() -> Result<Taxonomy, Failure> {
    match std::env::var_os(TAXONOMY_ENV) {
        None => Ok(default_taxonomy()),
        Some(path) => {
            let path = PathBuf::from(path);
            let text = fs::read_to_string(&path).map_err(|e| {
                Failure::usage(format!("{TAXONOMY_ENV}={}: {e}", path.display()))
            })?;
            load_taxonomy(&text)
                .map_err(|e| Failure::usage(format!("{TAXONOMY_ENV}={}: {e}", path.display())))
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn check_type(it: &InferredTaxonomy, id: &str) -> Result<(), Failure> {
    it.get(id)
        .map(|_| ())
        .ok_or_else(|| Failure::usage(format!("unknown stream type {id:?}")))
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(out, "{text}")?;
    Ok(())
}

fn classify(a: ClassifyArgs, it: &InferredTaxonomy, out: &mut dyn Write) -> Result<(), Failure> {
    for t in &a.expect {
        check_type(it, t)?;
    }
    let cfg = a.classifier.config()?;
    let report = classify_path(&a.input, a.framing, &cfg, it)?;
    if a.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.render_text())?;
    }
    let missing: Vec<&str> = a
        .expect
        .iter()
        .filter(|t| !report.conforms_to(t))
        .map(String::as_str)
        .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Failure::negative(format!(
            "stream does not conform to {}",
            missing.join(", ")
        )))
    }
}

fn default_framing(kind: ElementKind) -> Framing {
    match kind {
        ElementKind::Triple => Framing::FlatTriples,
        ElementKind::Quad => Framing::FlatQuads,
        ElementKind::Graph => Framing::FramedGraphs,
        ElementKind::Dataset => Framing::FramedDatasets,
    }
}

fn open_input(path: &Path, framing: Framing) -> Result<StreamIter<'static>, Failure> {
    fn statements(
        path: &Path,
        framing: Framing,
    ) -> Result<impl Iterator<Item = Result<Statement, ConvertError>>, Failure> {
        Ok(open_flat(path, framing)?.map(|r| r.map_err(ConvertError::from)))
    }
    fn elements(
        path: &Path,
        framing: Framing,
    ) -> Result<impl Iterator<Item = Result<Element, ConvertError>>, Failure> {
        Ok(open_grouped(path, framing)?.map(|r| r.map_err(ConvertError::from)))
    }
    Ok(match framing.element_kind() {
        ElementKind::Triple => StreamIter::Triples(Box::new(statements(path, framing)?.map(|r| {
            r.map(|s| match s {
                Statement::Triple(t) => t,
                Statement::Quad(q) => q.into_parts().0,
            })
        }))),
        ElementKind::Quad => StreamIter::Quads(Box::new(statements(path, framing)?.map(|r| {
            r.map(|s| match s {
                Statement::Quad(q) => q,
                Statement::Triple(t) => crate::model::Quad::from_triple(t, None).unwrap(),
            })
        }))),
        ElementKind::Graph => StreamIter::Graphs(Box::new(elements(path, framing)?.map(move |r| {
            r.and_then(|e| match e {
                Element::Graph(g) => Ok(g),
                Element::Dataset(_) => Err(ConvertError::Read(ReadError::WrongFraming(framing))),
            })
        }))),
        ElementKind::Dataset => StreamIter::Datasets(Box::new(elements(path, framing)?.map(|r| {
            r.map(|e| match e {
                Element::Dataset(d) => d,
                Element::Graph(g) => crate::model::Dataset::from_default_graph(g),
            })
        }))),
    })
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn output_writer<'a>(path: &Path, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, Failure> {
    if is_stdio(path) {
        Ok(Box::new(stdout))
    } else {
        let file = File::create(path)
            .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn convert(a: ConvertArgs, it: &InferredTaxonomy, stdout: &mut dyn Write) -> Result<(), Failure> {
    check_type(it, &a.from)?;
    check_type(it, &a.to)?;
    let from_kind = element_kind_of(it, &a.from)?;
    let to_kind = element_kind_of(it, &a.to)?;
    let in_framing = a.input_framing.unwrap_or(default_framing(from_kind));
    let out_framing = a.output_framing.unwrap_or(default_framing(to_kind));
    if in_framing.element_kind() != from_kind {
        return Err(Failure::usage(format!(
            "input framing {in_framing} does not hold {} streams",
            a.from
        )));
    }
    if out_framing.element_kind() != to_kind {
        return Err(Failure::usage(format!(
            "output framing {out_framing} does not hold {} streams",
            a.to
        )));
    }
    if is_stdio(&a.output) && out_framing.is_directory() {
        return Err(Failure::usage("directory framings cannot be written to standard output"));
    }
    // Plan before opening anything so that a missing path is reported as such.
    crate::converter::plan_conversion(it, &a.from, &a.to, a.policy)?;
    let input = open_input(&a.input, in_framing)?;
    let converted = convert_iter(input, &a.from, &a.to, it, a.policy, a.batch_size)?;

    match converted {
        StreamIter::Triples(items) => {
            let mut w = output_writer(&a.output, stdout)?;
            for t in items {
                write_flat_stream(&mut w, [&Statement::Triple(t?)], out_framing)?;
            }
            w.flush()?;
        }
        StreamIter::Quads(items) => {
            let mut w = output_writer(&a.output, stdout)?;
            for q in items {
                write_flat_stream(&mut w, [&Statement::Quad(q?)], out_framing)?;
            }
            w.flush()?;
        }
        StreamIter::Graphs(items) => {
            write_elements(items.map(|g| g.map(Element::Graph)), &a.output, out_framing, stdout)?
        }
        StreamIter::Datasets(items) => write_elements(
            items.map(|d| d.map(Element::Dataset)),
            &a.output,
            out_framing,
            stdout,
        )?,
    }
    Ok(())
}

fn write_elements(
    items: impl Iterator<Item = Result<Element, ConvertError>>,
    path: &Path,
    framing: Framing,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    if framing.is_directory() {
        let mut w = DirWriter::new(path, framing)?;
        for e in items {
            w.push(&e?)?;
        }
    } else {
        let mut w = FramedWriter::new(output_writer(path, stdout)?, framing)?;
        for e in items {
            w.push(&e?)?;
        }
        w.finish()?;
    }
    Ok(())
}

fn taxonomy_query(
    c: TaxonomyCommand,
    it: &InferredTaxonomy,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    match c {
        TaxonomyCommand::Relate { relation, from, to } => {
            check_type(it, &from)?;
            check_type(it, &to)?;
            let holds = it.relates(relation, &from, &to)?;
            writeln!(out, "{holds}")?;
            if !holds {
                return Err(Failure::negative(format!("{from} {} {to} does not hold", relation.name())));
            }
        }
        TaxonomyCommand::Closure { json } => {
            if json {
                let map: indexmap::IndexMap<&str, Vec<(&str, &str)>> = Relation::ALL
                    .into_iter()
                    .map(|r| (r.name(), it.pairs(r)))
                    .collect();
                print_json(out, &map)?;
            } else {
                for r in Relation::ALL {
                    for (a, b) in it.pairs(r) {
                        writeln!(out, "{a} {} {b}", r.name())?;
                    }
                }
            }
        }
        TaxonomyCommand::Path {
            from,
            to,
            policy,
            json,
        } => {
            check_type(it, &from)?;
            check_type(it, &to)?;
            let path = it.conversion_path(&from, &to, policy)?;
            if json {
                print_json(out, &path)?;
            } else if let Some(steps) = &path {
                if steps.is_empty() {
                    writeln!(out, "{from} is already {to}")?;
                }
                for s in steps {
                    writeln!(out, "{} {} {}", s.from, s.relation.name(), s.to)?;
                }
            }
            if path.is_none() {
                return Err(Failure::negative(format!(
                    "no conversion path from {from} to {to} under the {policy} policy"
                )));
            }
        }
    }
    Ok(())
}

fn annotate(a: AnnotateArgs, taxonomy: &Taxonomy, out: &mut dyn Write) -> Result<(), Failure> {
    let manifest = load_manifest(&read_text(&a.manifest)?, taxonomy)?;
    let turtle = emit_turtle(&manifest, taxonomy);
    match &a.out {
        Some(path) if !is_stdio(path) => fs::write(path, turtle)
            .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?,
        _ => out.write_all(turtle.as_bytes())?,
    }
    Ok(())
}

fn validate(a: ValidateArgs, it: &InferredTaxonomy, out: &mut dyn Write) -> Result<(), Failure> {
    let manifest = load_manifest(&read_text(&a.manifest)?, it.taxonomy())?;
    let mut report = validate_usages(&manifest, it, a.policy);
    if let (Some(data), Some(framing)) = (&a.data, a.framing) {
        let cfg = a.classifier.config()?;
        let classification = classify_path(data, framing, &cfg, it)?;
        report = report.merge(cross_check(&manifest, it, &classification));
    }
    if a.json {
        writeln!(out, "{}", report.to_json())?;
    } else {
        write!(out, "{}", report.render_text())?;
    }
    if report.consistent {
        Ok(())
    } else {
        Err(Failure::negative(format!(
            "{} violation(s)",
            report.violations.len()
        )))
    }
}
