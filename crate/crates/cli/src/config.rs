//! Subcommand options and the TOML config file. Every flag has a config key
//! of the same (kebab-case) name; flags win over the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, Result};

/// Declares an all-optional options struct usable both as clap arguments and
/// as a config table, with a field-wise merge.
macro_rules! options {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Default, Clone, clap::Args, Deserialize)]
        #[serde(rename_all = "kebab-case", deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])* #[arg(long)] pub $field: Option<$ty>,)*
        }

        impl $name {
            /// Fills every unset field from `file`.
            pub fn or(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field),)* }
            }
        }
    };
}

options! {
    /// Options shared by the subcommands that run the SDE.
    IntegrationOpts {
        /// Time step.
        dt: f64,
        steps: u64,
        burn_in: u64,
        trajectories: usize,
        /// Record observables every this many steps after burn-in.
        sample_every: u64,
    }
}

options! {
    SaddleOpts {
        p: f64,
        xi_j: f64,
        g: f64,
        /// Random-field amplitude h0/J.
        h0_over_j: f64,
        /// no-field or random-field (default: random-field when h0/J > 0).
        kind: String,
        /// Initial guess for the damped fixed-point iteration.
        init_m: f64,
        init_q: f64,
    }
}

options! {
    SweepOpts {
        /// First axis as name:start:stop:count or name=v1,v2,...
        axis1: String,
        axis2: String,
        /// Fixed parameter name=value, repeatable.
        fixed: Vec<String>,
        /// saddle, ensemble or both.
        mode: String,
        kind: String,
        /// Ensemble size N.
        n: usize,
        /// Seed of the random-field signs in ensemble rows.
        field_seed: u64,
        /// Also write a gnuplot heatmap script to this path.
        gnuplot: PathBuf,
        /// Column plotted by the gnuplot script.
        gnuplot_column: String,
    }
}

options! {
    FieldCurveOpts {
        p: f64,
        xi: f64,
        j: f64,
        g: f64,
        /// Field grid h0 as start:stop:count or v1,v2,...
        h0: String,
        mode: String,
        n: usize,
        field_seed: u64,
    }
}

options! {
    /// Problem instance: a file, or a fully connected ferromagnet of size N.
    ProblemOpts {
        problem: PathBuf,
        n: usize,
        j: f64,
        /// Random-field amplitude (absolute) for the generated ferromagnet.
        h0: f64,
        field_seed: u64,
    }
}

options! {
    SimulateOpts {
        p: f64,
        xi: f64,
        g: f64,
        /// vacuum or uniform:AMPLITUDE.
        init: String,
        /// none or positive.
        gauge: String,
        /// Also write one trajectory as tau,j,mu,nu rows to this path.
        trajectory_csv: PathBuf,
        trajectory_index: usize,
        snapshot_every: u64,
    }
}

options! {
    CrossvalOpts {
        p: f64,
        xi_j: f64,
        g: f64,
        h0_over_j: f64,
        kind: String,
        n: usize,
        field_seed: u64,
    }
}

options! {
    DbCheckOpts {
        p: f64,
        /// Injection strength of the dynamics.
        xi: f64,
        g: f64,
        /// Injection strengths at which the gaps are evaluated (comma separated).
        #[arg(value_delimiter = ',')]
        xi_eval: Vec<f64>,
        snapshot_every: u64,
    }
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<String>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub saddle: SaddleOpts,
    #[serde(default)]
    pub sweep: SweepOpts,
    #[serde(default)]
    pub field_curve: FieldCurveOpts,
    #[serde(default)]
    pub simulate: SimulateOpts,
    #[serde(default)]
    pub crossval: CrossvalOpts,
    #[serde(default)]
    pub db_check: DbCheckOpts,
    #[serde(default)]
    pub integration: IntegrationOpts,
    #[serde(default)]
    pub problem: ProblemOpts,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_tables_with_flag_names() {
        let cfg = ConfigFile::parse(
            r#"
seed = 9
threads = "auto"

[sweep]
axis1 = "p:0:2:5"
fixed = ["xiJ=0.2", "g=0.01"]

[integration]
burn-in = 100

[db-check]
xi-eval = [0.0, 0.2]
"#,
            Path::new("cfg.toml"),
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.sweep.fixed.as_deref(), Some(&["xiJ=0.2".to_string(), "g=0.01".to_string()][..]));
        assert_eq!(cfg.integration.burn_in, Some(100));
        assert_eq!(cfg.db_check.xi_eval, Some(vec![0.0, 0.2]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ConfigFile::parse("[saddle]\npump = 1.0\n", Path::new("c.toml")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn flags_override_file_values() {
        let flag = SaddleOpts { p: Some(1.2), ..Default::default() };
        let file = SaddleOpts { p: Some(0.5), g: Some(0.01), ..Default::default() };
        let merged = flag.or(file);
        assert_eq!((merged.p, merged.g), (Some(1.2), Some(0.01)));
    }
}
