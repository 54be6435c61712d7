use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use patternmc::checker::{check as check_property, parse_property, Horizon, Value};
use patternmc::inference::{em_fit, simulate_population, EmConfig};
use patternmc::model::{
    ingest_traces, write_traces, EventMapping, FitSummary, LogFormat, ModelDocument, StateSpace,
    UnmappedPolicy, UserStrategy,
};
use patternmc::prism::{export_prism as export_model, export_properties, QuestionParams};
use patternmc::questions::{q1, q2, q3, q4, Question, SweepSpec};
use patternmc::umm::Umm;
use patternmc::{Error, Result};

use crate::config::{CheckArgs, ExportArgs, FitArgs, SimulateArgs, SweepArgs, UmmArgs};

fn require<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidArgument(format!("missing --{flag}")))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_horizon(text: &str) -> Result<Horizon> {
    if text.eq_ignore_ascii_case("inf") {
        return Ok(Horizon::Unbounded);
    }
    text.parse()
        .map(Horizon::Bounded)
        .map_err(|_| Error::InvalidArgument(format!("step bound `{text}` is neither an integer nor `inf`")))
}

/// Strategy from `--theta`, from `--user`, or the document's only one.
fn strategy(doc: &ModelDocument, theta: Option<Vec<f64>>, user: Option<String>) -> Result<UserStrategy> {
    match (theta, user) {
        (Some(t), None) => UserStrategy::new("theta", t),
        (None, Some(u)) => doc.strategy(&u),
        (Some(_), Some(_)) => Err(Error::InvalidArgument("give --theta or --user, not both".into())),
        (None, None) => {
            let mut all = doc.strategies()?;
            if all.len() == 1 {
                Ok(all.remove(0))
            } else {
                Err(Error::InvalidArgument(
                    "pick a strategy with --theta or --user".into(),
                ))
            }
        }
    }
}

fn question(name: &str) -> Result<Question> {
    match name.parse()? {
        Question::Composed => Err(Error::InvalidArgument(
            "composed queries are only available through `sweep`".into(),
        )),
        q => Ok(q),
    }
}

fn question_params(i: Option<usize>, n: Option<String>, n2: Option<String>, q: Question) -> Result<QuestionParams> {
    let n2 = match (q, n2) {
        (_, Some(t)) => parse_horizon(&t)?,
        (Question::Q4, None) => return Err(Error::InvalidArgument("q4 needs --n2".into())),
        (_, None) => Horizon::Unbounded,
    };
    Ok(QuestionParams {
        i: require(i, "i")?,
        n: parse_horizon(&require(n, "n")?)?,
        n2,
    })
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let doc = ModelDocument::read(&require(a.model, "model")?)?;
    let mixture = doc.to_mixture()?;
    let strategies = if a.theta.is_some() || a.user.is_some() {
        let s = strategy(&doc, a.theta, a.user)?;
        (1..=a.users.unwrap_or(100))
            .map(|j| UserStrategy::new(format!("u{j}"), s.theta().to_vec()))
            .collect::<Result<Vec<_>>>()?
    } else if a.users.is_some() {
        return Err(Error::InvalidArgument("--users needs --theta or --user".into()));
    } else {
        doc.strategies()?
    };
    let format: LogFormat = a.format.as_deref().unwrap_or("tsv").parse()?;
    let traces = simulate_population(&mixture, &strategies, a.length.unwrap_or(200), a.seed.unwrap_or(0))?;
    let mut buf = Vec::new();
    write_traces(&mut buf, &traces, mixture.space(), format)?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("utf-8 log"))
}

pub fn fit(a: FitArgs) -> Result<()> {
    let space = match (&a.model, &a.states) {
        (Some(p), None) => ModelDocument::read(p)?.space()?,
        (None, Some(names)) => StateSpace::with_names(names, false)?,
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --model or --states".into(),
            ))
        }
    };
    let format: LogFormat = a.format.as_deref().unwrap_or("tsv").parse()?;
    let policy: UnmappedPolicy = a.unmapped.as_deref().unwrap_or("strict").parse()?;
    let file = File::open(require(a.traces, "traces")?)?;
    let traces = ingest_traces(BufReader::new(file), format, &EventMapping::from_space(&space), policy)?;
    let d = EmConfig::default();
    let config = EmConfig {
        k: a.k.unwrap_or(d.k),
        max_iters: a.max_iters.unwrap_or(d.max_iters),
        tol: a.tol.unwrap_or(d.tol),
        restarts: a.restarts.unwrap_or(d.restarts),
        seed: a.seed.unwrap_or(d.seed),
        smoothing: a.smoothing.unwrap_or(d.smoothing),
    };
    let result = em_fit(&traces, &space, &config)?;
    log::info!(
        "restart {} chosen, log-likelihood {}",
        result.chosen_restart,
        result.loglik
    );
    let mut doc = ModelDocument::from_mixture(&result.mixture, &result.strategies);
    doc.fit = Some(FitSummary {
        loglik: result.loglik,
        iters_per_restart: result.iters_per_restart.clone(),
        chosen_restart: result.chosen_restart,
    });
    if let Some(p) = &a.diagnostics {
        std::fs::write(p, result.diagnostics_tsv())?;
    }
    emit(a.out.as_deref(), &doc.to_json()?)
}

fn load_umm(model: Option<PathBuf>, theta: Option<Vec<f64>>, user: Option<String>) -> Result<(ModelDocument, Umm)> {
    let doc = ModelDocument::read(&require(model, "model")?)?;
    let s = strategy(&doc, theta, user)?;
    let umm = Umm::for_user(&doc.to_mixture()?, &s)?;
    Ok((doc, umm))
}

pub fn build_umm(a: UmmArgs) -> Result<()> {
    let (_, umm) = load_umm(a.model, a.theta, a.user)?;
    emit(a.out.as_deref(), &umm.to_document().to_json()?)
}

pub fn check(a: CheckArgs) -> Result<()> {
    let (_, umm) = load_umm(a.model, a.theta, a.user)?;
    let value = match (a.formula, a.question) {
        (Some(f), None) => match check_property(umm.dtmc(), &parse_property(&f)?)? {
            Value::Number(x) => x.to_string(),
            Value::Bool(b) => b.to_string(),
        },
        (None, Some(q)) => {
            let q = question(&q)?;
            let p = question_params(a.i, a.n, a.n2, q)?;
            let x = match q {
                Question::Q1 => q1(&umm, p.i, p.n)?,
                Question::Q2 => q2(&umm, p.i, p.n)?,
                Question::Q3 => q3(&umm, p.i, p.n)?,
                Question::Q4 => q4(&umm, p.i, p.n, p.n2)?,
                Question::Composed => unreachable!("rejected by question()"),
            };
            x.to_string()
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --formula or --question".into(),
            ))
        }
    };
    println!("{value}");
    Ok(())
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let spec_path = require(a.spec, "spec")?;
    let spec = SweepSpec::from_toml(&std::fs::read_to_string(&spec_path)?)?;
    // paths inside the spec are relative to the spec file
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let model = a
        .model
        .or_else(|| spec.model.as_ref().map(|m| base.join(m)))
        .ok_or_else(|| Error::InvalidArgument("missing --model (or `model` in the spec)".into()))?;
    let out = a.out.or_else(|| spec.output.as_ref().map(|o| base.join(o)));
    let doc = ModelDocument::read(&model)?;
    let umm = Umm::for_user(&doc.to_mixture()?, &spec.strategy(Some(&doc))?)?;
    let table = spec.run(&umm)?;
    emit(out.as_deref(), &table.to_csv()?)?;
    for c in table.cells.iter().filter(|c| c.result.is_err()) {
        let values: Vec<String> = c.values.iter().map(ToString::to_string).collect();
        log::warn!("cell ({}) failed: {}", values.join(","), c.result.as_ref().unwrap_err());
    }
    if table.all_failed() {
        return Err(Error::InvalidModel("every sweep cell failed".into()));
    }
    Ok(())
}

pub fn export_prism(a: ExportArgs) -> Result<()> {
    let doc = ModelDocument::read(&require(a.model, "model")?)?;
    let s = strategy(&doc, a.theta, a.user)?;
    let text = export_model(&doc.to_mixture()?, s.theta(), &s.user_id)?.text();
    if let Some(q) = a.question {
        let q = question(&q)?;
        let props = export_properties(q, question_params(a.i, a.n, a.n2, q)?)?;
        if a.out.is_none() && a.properties_out.is_none() {
            return Err(Error::InvalidArgument(
                "with --question, write the model or the properties to a file".into(),
            ));
        }
        emit(a.out.as_deref(), &text)?;
        return emit(a.properties_out.as_deref(), &props);
    }
    emit(a.out.as_deref(), &text)
}
