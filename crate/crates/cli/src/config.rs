use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::ValueEnum;
use freedeconv::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// `min:max:step`, inclusive of both ends when step divides the range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts[..] else {
            return Err(format!("grid `{s}` is not min:max:step"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let g = GridSpec {
            min: num(min)?,
            max: num(max)?,
            step: num(step)?,
        };
        if !(g.step > 0.0) || !g.step.is_finite() {
            return Err(format!("grid step must be positive (got {})", g.step));
        }
        if !(g.max >= g.min) || !g.min.is_finite() || !g.max.is_finite() {
            return Err(format!("grid needs min ≤ max (got {}:{})", g.min, g.max));
        }
        if (g.max - g.min) / g.step > 1e7 {
            return Err("grid has more than 10⁷ points".into());
        }
        Ok(g)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.step)
    }
}

/// Options shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Tolerance override; each command documents what it bounds.
    pub tol: Option<f64>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(format: Format, out: Option<PathBuf>, tol: Option<f64>, threads: Option<&str>) -> Result<Self, CliError> {
        if let Some(t) = tol {
            if !(t > 0.0) || !t.is_finite() {
                return Err(CliError::Usage(format!("--tol must be positive (got {t})")));
            }
        }
        let threads = match threads {
            None => None,
            Some(s) => match s.trim().parse::<usize>() {
                Ok(n) if n > 0 => Some(n),
                _ => return Err(CliError::Usage(format!("FREEDECONV_THREADS must be a positive integer (got `{s}`)"))),
            },
        };
        Ok(RunConfig {
            format,
            out,
            tol,
            threads,
        })
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(String),
    Io(std::io::Error),
    VerifyFailed,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    /// 1 verification failure or I/O, 2 parse/usage, 3 invalid parameters,
    /// 4 numerical non-convergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed | CliError::Io(_) => 1,
            CliError::Usage(_) | CliError::Lib(Error::Parse(_)) => 2,
            CliError::Lib(
                Error::NoConvergence { .. } | Error::LeftHalfPlaneEscape(_) | Error::BranchMismatch { .. },
            ) => 4,
            CliError::Lib(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
            CliError::VerifyFailed => write!(f, "verification failed"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: GridSpec = "-1:1:0.5".parse().unwrap();
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!("-4:4:0.01".parse::<GridSpec>().unwrap().points().len(), 801);
        assert!("0:1:0".parse::<GridSpec>().is_err());
        assert!("1:0:0.1".parse::<GridSpec>().is_err());
        assert!("0:1".parse::<GridSpec>().is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Lib(Error::Parse("x".into())).exit_code(), 2);
        assert_eq!(CliError::Lib(Error::Validity("x".into())).exit_code(), 3);
        let nc = Error::NoConvergence {
            iterations: 1,
            residual: 1.0,
            iterates: vec![],
        };
        assert_eq!(CliError::Lib(nc).exit_code(), 4);
        assert_eq!(CliError::VerifyFailed.exit_code(), 1);
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::new(Format::Json, None, Some(0.0), None).is_err());
        assert!(RunConfig::new(Format::Json, None, None, Some("zero")).is_err());
        assert_eq!(RunConfig::new(Format::Csv, None, Some(1e-6), Some("2")).unwrap().threads, Some(2));
    }
}
