use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{HeatExperimentConfig, SweepSpec};
use crate::sampler::{KernelConfig, KernelKind};

/// Environment variable that, when set, supplies the seed unless `--seed` is given.
pub const SEED_ENV: &str = "MFHMC_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Run one chain and write it with its diagnostics.
    Sample,
    /// Seed-averaged HMC vs MFHMC sweep on a Wishart Gaussian.
    MvnSweep,
    /// HMC vs TSVD-surrogate MFHMC on the heat-equation inversion.
    HeatTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Mvn,
    Heat,
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mvn" => Ok(Problem::Mvn),
            "heat" => Ok(Problem::Heat),
            other => Err(Error::config("problem", format!("expected `mvn` or `heat`, got `{other}`"))),
        }
    }
}

macro_rules! keys {
    ($($field:ident => $doc:literal),* $(,)?) => {
        /// Every configurable key as an optional raw string. Flags use the
        /// kebab-case form of the key.
        #[derive(Debug, Clone, Default, Args)]
        pub struct KeyArgs {
            $(#[doc = $doc] #[arg(long, allow_hyphen_values = true)] pub $field: Option<String>,)*
        }

        /// Recognised keys, as spelled in config files.
        pub const KEYS: &[&str] = &[$(stringify!($field)),*];

        impl KeyArgs {
            fn into_map(self) -> BTreeMap<&'static str, String> {
                let mut map = BTreeMap::new();
                $(if let Some(v) = self.$field { map.insert(stringify!($field), v); })*
                map
            }
        }
    };
}

keys! {
    algorithm => "hmc or mfhmc",
    problem => "Target for `sample`: mvn or heat",
    epsilon => "Leapfrog step size",
    n_leapfrog => "Leapfrog steps per proposal",
    n_steps => "Chain length",
    burn_in_frac => "Fraction of iterations discarded as burn-in",
    seed => "Root seed",
    gamma => "Comma-separated LF perturbation strengths",
    modes => "Comma-separated TSVD ranks",
    dim => "Gaussian dimension",
    dof => "Wishart degrees of freedom",
    budget => "HF-evaluation cap for `sample`",
    budgets => "Comma-separated, strictly increasing HF-evaluation caps",
    trajectories => "Comma-separated eps:L pairs",
    n_seeds => "Seeds per cell",
    sigma_noise => "Measurement noise standard deviation",
    sigma_prior => "Prior standard deviation",
    grid_n => "Heat grid points per side",
    include_hmc => "Also run single-stage HMC (true/false)",
    lf_operator => "CSV matrix used as an extra heat surrogate",
    true_field => "CSV column of initial-field values for the heat data",
    thin => "Keep every thin-th iteration in chain.csv",
    out_dir => "Output directory",
}

#[derive(Debug, Parser)]
#[command(name = "mfhmc", version, about = "Multi-fidelity HMC sampler and experiments")]
pub struct Cli {
    pub command: Command,
    /// key=value file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub keys: KeyArgs,
}

/// Fully validated settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub algorithm: KernelKind,
    pub problem: Problem,
    pub kernel: KernelConfig,
    pub gammas: Vec<f64>,
    pub modes: Vec<usize>,
    pub dim: usize,
    pub dof: usize,
    pub budget: Option<u64>,
    pub budgets: Vec<u64>,
    pub trajectories: Vec<(f64, usize)>,
    pub n_seeds: usize,
    pub sigma_noise: f64,
    pub sigma_prior: f64,
    pub grid_n: usize,
    pub include_hmc: bool,
    pub lf_operator: Option<PathBuf>,
    pub true_field: Option<PathBuf>,
    pub thin: usize,
    pub out_dir: PathBuf,
}

pub const DEFAULT_MVN_DIM: usize = 50;
pub const DEFAULT_HEAT_MODES: [usize; 6] = [25, 50, 75, 100, 200, 1024];

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| Error::config(key, format!("cannot parse `{}`: {e}", raw.trim())))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    let items: Vec<T> = raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(key, "list is empty"));
    }
    Ok(items)
}

fn parse_trajectories(raw: &str) -> Result<Vec<(f64, usize)>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (eps, l) = pair
                .split_once(':')
                .ok_or_else(|| Error::config("trajectories", format!("expected eps:L, got `{}`", pair.trim())))?;
            Ok((parse_value("trajectories", eps)?, parse_value("trajectories", l)?))
        })
        .collect()
}

/// Parses flat `key=value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str, path: &Path) -> Result<BTreeMap<&'static str, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            reason: "expected key=value".into(),
        })?;
        let key = key.trim().replace('-', "_");
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| Error::UnknownKey(key.clone()))?;
        map.insert(*known, value.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    /// Merges the layers, highest precedence first: flags, `MFHMC_SEED`
    /// (seed only), file, built-in defaults.
    pub fn resolve(
        command: Command,
        flags: KeyArgs,
        file: BTreeMap<&'static str, String>,
        env_seed: Option<String>,
    ) -> Result<Self> {
        let mut merged = file;
        if let Some(seed) = env_seed {
            merged.insert("seed", seed);
        }
        merged.extend(flags.into_map());
        let get = |k: &str| merged.get(k).map(String::as_str);

        let problem = get("problem").map(str::parse).transpose()?.unwrap_or(match command {
            Command::HeatTable => Problem::Heat,
            _ => Problem::Mvn,
        });
        let heat_defaults = HeatExperimentConfig::default();
        let sweep_defaults = SweepSpec::default();
        let (default_eps, default_l, default_steps) = match problem {
            Problem::Heat => (heat_defaults.epsilon, heat_defaults.n_leapfrog, heat_defaults.n_steps),
            Problem::Mvn => (0.05, 10, 5_000),
        };
        let opt = |k: &'static str| -> Option<&str> { get(k) };
        macro_rules! scalar {
            ($key:literal, $default:expr) => {
                match opt($key) {
                    Some(raw) => parse_value($key, raw)?,
                    None => $default,
                }
            };
        }
        macro_rules! list {
            ($key:literal, $default:expr) => {
                match opt($key) {
                    Some(raw) => parse_list($key, raw)?,
                    None => $default,
                }
            };
        }

        let kernel = KernelConfig {
            epsilon: scalar!("epsilon", default_eps),
            n_leapfrog: scalar!("n_leapfrog", default_l),
            n_steps: scalar!("n_steps", default_steps),
            burn_in_frac: scalar!("burn_in_frac", KernelConfig::DEFAULT_BURN_IN),
            seed: scalar!("seed", 0),
        };
        kernel.validate()?;
        let dim: usize = scalar!("dim", DEFAULT_MVN_DIM);
        let config = RunConfig {
            command,
            algorithm: scalar!("algorithm", KernelKind::Mfhmc),
            problem,
            kernel,
            gammas: list!("gamma", sweep_defaults.gammas.clone()),
            modes: list!("modes", DEFAULT_HEAT_MODES.to_vec()),
            dim,
            dof: scalar!("dof", dim),
            budget: opt("budget").map(|raw| parse_value("budget", raw)).transpose()?,
            budgets: list!("budgets", sweep_defaults.budgets.clone()),
            trajectories: match opt("trajectories") {
                Some(raw) => parse_trajectories(raw)?,
                None => sweep_defaults.trajectories.clone(),
            },
            n_seeds: scalar!("n_seeds", sweep_defaults.n_seeds),
            sigma_noise: scalar!("sigma_noise", heat_defaults.sigma_noise),
            sigma_prior: scalar!("sigma_prior", heat_defaults.sigma_prior),
            grid_n: scalar!("grid_n", heat_defaults.heat.grid_n),
            include_hmc: scalar!("include_hmc", true),
            lf_operator: opt("lf_operator").map(PathBuf::from),
            true_field: opt("true_field").map(PathBuf::from),
            thin: scalar!("thin", 1),
            out_dir: opt("out_dir").map_or_else(|| PathBuf::from("out"), PathBuf::from),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if self.dof < self.dim {
            return Err(Error::config("dof", "must be at least dim"));
        }
        if self.thin == 0 {
            return Err(Error::config("thin", "must be at least 1"));
        }
        if self.gammas.iter().any(|g| !(*g >= 0.0)) {
            return Err(Error::config("gamma", "must be non-negative"));
        }
        if self.modes.contains(&0) {
            return Err(Error::config("modes", "ranks must be at least 1"));
        }
        if self.grid_n == 0 {
            return Err(Error::config("grid_n", "must be at least 1"));
        }
        if self.budget == Some(0) {
            return Err(Error::config("budget", "must be positive"));
        }
        self.sweep_spec().validate()?;
        self.heat_config(None, None).validate()
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            budgets: self.budgets.clone(),
            trajectories: self.trajectories.clone(),
            gammas: self.gammas.clone(),
            n_seeds: self.n_seeds,
            burn_in_frac: self.kernel.burn_in_frac,
            include_hmc: self.include_hmc,
            ..SweepSpec::default()
        }
    }

    pub fn heat_config(
        &self,
        true_field: Option<nalgebra::DVector<f64>>,
        lf_operator: Option<nalgebra::DMatrix<f64>>,
    ) -> HeatExperimentConfig {
        let defaults = HeatExperimentConfig::default();
        HeatExperimentConfig {
            heat: crate::forward_models::HeatOperatorSpec {
                grid_n: self.grid_n,
                ..defaults.heat
            },
            sigma_noise: self.sigma_noise,
            sigma_prior: self.sigma_prior,
            epsilon: self.kernel.epsilon,
            n_leapfrog: self.kernel.n_leapfrog,
            n_steps: self.kernel.n_steps,
            burn_in_frac: self.kernel.burn_in_frac,
            n_seeds: self.n_seeds,
            include_hmc: self.include_hmc,
            true_field,
            lf_operator,
        }
    }
}

/// Parses command-line arguments (program name first), reading the file
/// named by `--config` if present, or `config_file` otherwise.
pub fn parse_config<I, T>(args: I, config_file: Option<&Path>) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let msg = e.to_string();
        Error::config("arguments", msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string())
    })?;
    let file = match cli.config.as_deref().or(config_file) {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_config_file(&text, path)?
        }
        None => BTreeMap::new(),
    };
    RunConfig::resolve(cli.command, cli.keys, file, std::env::var(SEED_ENV).ok())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(args: &[&str]) -> (Command, KeyArgs) {
        let cli = Cli::try_parse_from(std::iter::once("mfhmc").chain(args.iter().copied())).unwrap();
        (cli.command, cli.keys)
    }

    fn resolve(args: &[&str], file: &str, env: Option<&str>) -> Result<RunConfig> {
        let (command, keys) = flags(args);
        let file = parse_config_file(file, Path::new("run.cfg"))?;
        RunConfig::resolve(command, keys, file, env.map(String::from))
    }

    #[test]
    fn valid_flags() {
        let c = resolve(&["sample", "--epsilon", "0.1", "--n-leapfrog", "10", "--algorithm", "mfhmc"], "", None).unwrap();
        assert_eq!(c.kernel.epsilon, 0.1);
        assert_eq!(c.kernel.n_leapfrog, 10);
        assert_eq!(c.algorithm, KernelKind::Mfhmc);
        assert_eq!(c.kernel.burn_in_frac, 0.25);
    }

    #[test]
    fn negative_epsilon_names_key() {
        let err = resolve(&["sample", "--epsilon=-1"], "", None).unwrap_err();
        assert!(err.to_string().contains("epsilon"), "{err}");
    }

    #[test]
    fn flag_beats_file() {
        let c = resolve(&["sample", "--epsilon", "0.1"], "epsilon = 0.05\n", None).unwrap();
        assert_eq!(c.kernel.epsilon, 0.1);
        let c = resolve(&["sample"], "# step\nepsilon = 0.05  # small\n", None).unwrap();
        assert_eq!(c.kernel.epsilon, 0.05);
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve(&["sample"], "seed=1", Some("2")).unwrap().kernel.seed, 2);
        assert_eq!(resolve(&["sample", "--seed", "3"], "seed=1", Some("2")).unwrap().kernel.seed, 3);
        assert_eq!(resolve(&["sample"], "seed=1", None).unwrap().kernel.seed, 1);
    }

    #[test]
    fn unknown_and_malformed_keys() {
        assert!(matches!(resolve(&["sample"], "bogus=1", None), Err(Error::UnknownKey(k)) if k == "bogus"));
        assert!(matches!(resolve(&["sample"], "epsilon", None), Err(Error::Parse { line: 1, .. })));
        let err = resolve(&["sample", "--n-steps", "many"], "", None).unwrap_err();
        assert!(err.to_string().contains("n_steps"), "{err}");
        assert!(parse_config(["mfhmc", "sample", "--bogus", "1"], None).is_err());
    }

    #[test]
    fn lists_and_pairs() {
        let c = resolve(
            &["mvn-sweep", "--gamma", "1e-4,1e-6", "--budgets", "100,200", "--trajectories", "0.1:5,0.2:10"],
            "",
            None,
        )
        .unwrap();
        assert_eq!(c.gammas, vec![1e-4, 1e-6]);
        assert_eq!(c.budgets, vec![100, 200]);
        assert_eq!(c.trajectories, vec![(0.1, 5), (0.2, 10)]);
        assert!(resolve(&["mvn-sweep", "--budgets", "200,100"], "", None).is_err());
        assert!(resolve(&["mvn-sweep", "--trajectories", "0.1"], "", None).is_err());
    }

    #[test]
    fn heat_defaults() {
        let c = resolve(&["heat-table"], "", None).unwrap();
        assert_eq!(c.problem, Problem::Heat);
        assert_eq!(c.kernel.n_steps, 20_000);
        assert_eq!(c.modes, DEFAULT_HEAT_MODES.to_vec());
    }

    #[test]
    fn file_keys_accept_kebab_case() {
        let c = resolve(&["sample"], "n-leapfrog=7", None).unwrap();
        assert_eq!(c.kernel.n_leapfrog, 7);
    }
}
