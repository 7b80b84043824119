use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::schedule::DmrgSchedule;
use super::state::MpsState;
use crate::error::{Error, Result};
use crate::tensor::Scalar;

pub const CHECKPOINT_FORMAT: &str = "qsg-mps-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON container for a state and the schedule that produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Checkpoint<T> {
    pub format: String,
    pub version: u32,
    /// "real" or "complex".
    pub scalar: String,
    pub schedule: Option<DmrgSchedule>,
    pub seed: u64,
    /// Energy (finite) or energy density (infinite) at save time.
    pub energy: Option<f64>,
    pub state: MpsState<T>,
}

fn scalar_tag<T: Scalar>() -> &'static str {
    if T::IS_COMPLEX { "complex" } else { "real" }
}

impl<T: Scalar> Checkpoint<T> {
    pub fn new(state: MpsState<T>, schedule: Option<DmrgSchedule>, energy: Option<f64>) -> Self {
        let seed = schedule.as_ref().map_or(0, |s| s.rng_seed);
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            scalar: scalar_tag::<T>().into(),
            schedule,
            seed,
            energy,
            state,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // Read the header first so a wrong scalar type gets a clear message.
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
            scalar: String,
        }
        let h: Header = serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
        if h.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", h.format)));
        }
        if h.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", h.version)));
        }
        if h.scalar != scalar_tag::<T>() {
            return Err(Error::Checkpoint(format!("checkpoint holds {} data", h.scalar)));
        }
        let c: Self = serde_json::from_str(text).map_err(|e| Error::Checkpoint(e.to_string()))?;
        // Re-run the structural checks the deserializer skipped.
        let form = c.state.form();
        let d = c.state.local_dim();
        let (t, s) = c.state.clone().into_parts();
        MpsState::new(t, s, form, d).map_err(|e| Error::Checkpoint(format!("inconsistent state: {e}")))?;
        if let Some(sc) = &c.schedule {
            sc.validate().map_err(|e| Error::Checkpoint(format!("inconsistent schedule: {e}")))?;
        }
        Ok(c)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_json()?)
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Checkpoint(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::C64;

    #[test]
    fn round_trip_and_header_checks() {
        let s = MpsState::<C64>::random(5, 3, 4, 9).unwrap();
        let c = Checkpoint::new(s.clone(), Some(DmrgSchedule::fixed(4)), Some(-1.25));
        let text = c.to_json().unwrap();
        let back = Checkpoint::<C64>::from_json(&text).unwrap();
        assert_eq!(back.state, s);
        assert_eq!(back.seed, 1);
        assert!(matches!(Checkpoint::<f64>::from_json(&text), Err(Error::Checkpoint(_))));
        let bumped = text.replacen("\"version\":1", "\"version\":99", 1);
        assert!(Checkpoint::<C64>::from_json(&bumped).is_err());
    }
}
