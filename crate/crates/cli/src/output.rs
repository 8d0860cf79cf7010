//! Output collection: every artifact carries the seed and parameters, and
//! a run writes either to stdout or to a directory with a manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use scalelab::stats::Report;

use crate::app::Failure;
use crate::svg;

pub const TOOL: &str = "scalelab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// Line-oriented text or CSV; manifest as a leading `#` line.
    Text,
    /// JSON object; manifest under the `manifest` key.
    Json,
    /// SVG; manifest in an XML comment.
    Svg,
}

#[derive(Clone, Debug)]
pub struct Artifact {
    name: String,
    body: String,
    kind: Kind,
}

impl Artifact {
    pub fn text(name: &str, mut body: String) -> Self {
        if !body.is_empty() && !body.ends_with('\n') {
            body.push('\n');
        }
        Artifact {
            name: name.into(),
            body,
            kind: Kind::Text,
        }
    }

    fn json(name: &str, body: String) -> Self {
        Artifact {
            name: name.into(),
            body,
            kind: Kind::Json,
        }
    }

    fn svg(name: &str, body: String) -> Self {
        Artifact {
            name: name.into(),
            body,
            kind: Kind::Svg,
        }
    }
}

pub struct Run {
    command: String,
    seed: u64,
    params: Map<String, Value>,
    artifacts: Vec<Artifact>,
    /// Set when some requested artifact only makes sense on disk.
    needs_dir: Option<&'static str>,
}

impl Run {
    pub fn new(command: &str, seed: u64, params: Map<String, Value>) -> Self {
        Run {
            command: command.into(),
            seed,
            params,
            artifacts: Vec::new(),
            needs_dir: None,
        }
    }

    pub fn with(mut self, a: Artifact) -> Self {
        self.artifacts.push(a);
        self
    }

    /// JSON report always; CSV of the raw series and SVG histograms on request.
    pub fn report(mut self, name: &str, report: Report, csv: bool, svg_plots: bool) -> Self {
        self.params.insert("experiment".into(), json!(name));
        let body = serde_json::to_string(&report).expect("report serializes");
        self.artifacts.push(Artifact::json(&format!("{name}.json"), body));
        if csv {
            self.needs_dir = Some("--csv");
            self.artifacts.push(Artifact::text(&format!("{name}.csv"), report.to_csv()));
        }
        if svg_plots {
            self.needs_dir = self.needs_dir.or(Some("--svg"));
            for s in &report.series {
                let title = format!("{name}: {}", s.name);
                self.artifacts
                    .push(Artifact::svg(&format!("{name}_{}.svg", s.name), svg::histogram(&title, &s.values, s.reference)));
            }
        }
        self
    }

    fn manifest(&self) -> Value {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "outputs": self.artifacts.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
        })
    }

    /// One-line `key=value` rendering of the manifest for text headers.
    fn header_line(&self) -> String {
        let mut s = format!("{TOOL} {VERSION} {} seed={}", self.command, self.seed);
        for (k, v) in &self.params {
            let v = match v {
                Value::String(x) if !x.contains(char::is_whitespace) && !x.is_empty() => x.clone(),
                other => other.to_string(),
            };
            write!(s, " {k}={v}").unwrap();
        }
        s
    }

    fn render(&self, a: &Artifact) -> String {
        match a.kind {
            Kind::Text => format!("# {} output={}\n{}", self.header_line(), a.name, a.body),
            Kind::Json => {
                let mut v: Value = serde_json::from_str(&a.body).expect("artifact is JSON");
                if let Value::Object(m) = &mut v {
                    m.insert("manifest".into(), self.manifest());
                }
                serde_json::to_string_pretty(&v).expect("serializable") + "\n"
            }
            Kind::Svg => {
                // `--` may not appear inside an XML comment.
                let note = format!("{} output={}", self.header_line(), a.name).replace("--", "- -");
                match a.body.split_once('\n') {
                    Some((decl, rest)) => format!("{decl}\n<!-- {note} -->\n{rest}"),
                    None => format!("<!-- {note} -->\n{}", a.body),
                }
            }
        }
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<(), Failure> {
        let Some(dir) = out else {
            if let Some(flag) = self.needs_dir {
                return Err(Failure::Usage(format!("{flag} needs an output directory (--out or $SCALELAB_OUT_DIR)")));
            }
            let mut stdout = String::new();
            for (i, a) in self.artifacts.iter().enumerate() {
                if i > 0 {
                    stdout.push('\n');
                }
                stdout.push_str(&self.render(a));
            }
            print!("{stdout}");
            return Ok(());
        };
        let io = |what: &Path, e: std::io::Error| Failure::Internal(format!("{}: {e}", what.display()));
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        for a in &self.artifacts {
            let path = dir.join(&a.name);
            std::fs::write(&path, self.render(a)).map_err(|e| io(&path, e))?;
            println!("{}", path.display());
        }
        let path = dir.join("manifest.json");
        let body = serde_json::to_string_pretty(&self.manifest()).expect("serializable") + "\n";
        std::fs::write(&path, body).map_err(|e| io(&path, e))?;
        println!("{}", path.display());
        Ok(())
    }
}
