//! Run configuration, JSON report plumbing, and the CSV/PBM/PGM exporters.
//!
//! Reports are deterministic: identical configurations (including the seed)
//! produce byte-identical files, and every report embeds the configuration
//! hash and the library version.

use std::io::Write;
use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::family::{BFamily, Cell, EtaWindow};
use crate::ideal::Ideal;
use crate::ring::RingOfIntegers;
use crate::Caps;

/// Serialize big integers as literal JSON integers (arbitrary precision).
pub mod jsonnum {
    use super::*;
    use serde::de::Error as DeError;

    pub fn serialize<S: serde::Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        let n = serde_json::Number::from_string_unchecked(v.to_string());
        n.serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::Number(n) => n
                .to_string()
                .parse::<BigInt>()
                .map_err(|e| D::Error::custom(format!("not an integer: {e}"))),
            serde_json::Value::String(s) => s
                .parse::<BigInt>()
                .map_err(|e| D::Error::custom(format!("not an integer: {e}"))),
            other => Err(D::Error::custom(format!("expected integer, got {other}"))),
        }
    }
}

/// Ideal in its JSON form `{"a": .., "b": .., "c": ..}` (b, c omitted in
/// degree 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdealConfig {
    #[serde(with = "jsonnum")]
    pub a: BigInt,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<i64>,
}

impl IdealConfig {
    pub fn of(ideal: &Ideal) -> IdealConfig {
        let (a, b, c) = ideal.hnf();
        match ideal.ring().degree() {
            1 => IdealConfig { a, b: None, c: None },
            _ => IdealConfig {
                a,
                b: Some(b.try_into().expect("HNF fields fit i64 in configs")),
                c: Some(c.try_into().expect("HNF fields fit i64 in configs")),
            },
        }
    }

    pub fn into_ideal(&self, ring: RingOfIntegers) -> Result<Ideal, Error> {
        match ring.degree() {
            1 => Ideal::from_hnf(ring, self.a.clone(), BigInt::from(0), BigInt::from(0)),
            _ => {
                let b = BigInt::from(self.b.ok_or_else(|| {
                    Error::InvalidFamily("degree-2 ideal config needs b".into())
                })?);
                let c = BigInt::from(self.c.ok_or_else(|| {
                    Error::InvalidFamily("degree-2 ideal config needs c".into())
                })?);
                Ideal::from_hnf(ring, self.a.clone(), b, c)
            }
        }
    }
}

/// Family configuration: variant tag plus parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum FamilyConfig {
    Finite { members: Vec<IdealConfig> },
    PrimeSquares,
    ScaledPrimes {
        scale: IdealConfig,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        exclude: Vec<IdealConfig>,
    },
    PowersTimesCoprime { c: Vec<u64> },
}

impl FamilyConfig {
    pub fn of(family: &BFamily) -> FamilyConfig {
        match family {
            BFamily::Finite(f) => FamilyConfig::Finite {
                members: f.members().iter().map(IdealConfig::of).collect(),
            },
            BFamily::PrimeSquares { .. } => FamilyConfig::PrimeSquares,
            BFamily::ScaledPrimes { scale, exclude } => FamilyConfig::ScaledPrimes {
                scale: IdealConfig::of(scale),
                exclude: exclude.iter().map(IdealConfig::of).collect(),
            },
            BFamily::PowersTimesCoprime { coeffs } => {
                FamilyConfig::PowersTimesCoprime { c: coeffs.clone() }
            }
        }
    }

    pub fn into_family(&self, ring: RingOfIntegers, caps: &Caps) -> Result<BFamily, Error> {
        match self {
            FamilyConfig::Finite { members } => {
                let members = members
                    .iter()
                    .map(|m| m.into_ideal(ring))
                    .collect::<Result<Vec<_>, _>>()?;
                BFamily::finite(ring, members)
            }
            FamilyConfig::PrimeSquares => Ok(BFamily::prime_squares(ring)),
            FamilyConfig::ScaledPrimes { scale, exclude } => {
                let scale = scale.into_ideal(ring)?;
                let exclude = exclude
                    .iter()
                    .map(|m| m.into_ideal(ring))
                    .collect::<Result<Vec<_>, _>>()?;
                BFamily::scaled_primes(scale, exclude, caps)
            }
            FamilyConfig::PowersTimesCoprime { c } => {
                if ring.degree() != 1 {
                    return Err(Error::InvalidFamily(
                        "powers_times_coprime is a rational-integer family".into(),
                    ));
                }
                BFamily::powers_times_coprime(c.clone())
            }
        }
    }
}

/// Effort caps in their config form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapsConfig {
    pub factor_trial_bound: u64,
    pub residue_cap: u64,
    pub stage_cap: usize,
    pub scan_cap: u64,
}

impl CapsConfig {
    pub fn of(caps: &Caps) -> CapsConfig {
        CapsConfig {
            factor_trial_bound: caps.factor.trial_bound,
            residue_cap: caps.residue_cap,
            stage_cap: caps.stage_cap,
            scan_cap: caps.scan_cap,
        }
    }

    pub fn into_caps(&self) -> Caps {
        let mut caps = Caps::default();
        caps.factor.trial_bound = self.factor_trial_bound;
        caps.residue_cap = self.residue_cap;
        caps.stage_cap = self.stage_cap;
        caps.scan_cap = self.scan_cap;
        caps
    }
}

/// One run of the command-line front end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub ring: RingOfIntegers,
    pub family: Option<FamilyConfig>,
    pub radius: u32,
    pub stages: usize,
    pub caps: CapsConfig,
    pub seed: u64,
}

/// Canonical hash of a configuration (sha256 of its canonical JSON).
pub fn config_hash(cfg: &RunConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let mut h = Sha256::new();
    h.update(json.as_bytes());
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Standard report envelope.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(cfg: &RunConfig, body: T) -> Report<T> {
        Report {
            version: crate::VERSION.to_string(),
            config_hash: config_hash(cfg),
            seed: cfg.seed,
            body,
        }
    }
}

/// Write bytes atomically (temp file + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// CSV of a window: `x,y,value` rows in canonical order; holes print `?`.
pub fn window_csv(w: &EtaWindow) -> String {
    let mut out = String::from("x,y,value\n");
    let ring = w.window.ring;
    for (rel, cell) in w.iter() {
        let abs = ring.add(&rel, &w.offset);
        let v = match cell {
            Cell::Zero => "0".to_string(),
            Cell::One => "1".to_string(),
            Cell::Hole => "?".to_string(),
        };
        out.push_str(&format!("{},{},{}\n", abs.x, abs.y, v));
    }
    out
}

/// Portable bitmap (P1) of a 2-D window: multiples are black, free white.
/// Degree-1 windows render as a one-row image. Holes are not representable
/// in PBM; use PGM for skeletons.
pub fn window_pbm(w: &EtaWindow) -> Result<String, Error> {
    if w.has_holes() {
        return Err(Error::HolesPresent);
    }
    let side = 2 * w.window.radius as usize + 1;
    let (width, height) = match w.window.ring.degree() {
        1 => (side, 1),
        _ => (side, side),
    };
    let mut out = format!("P1\n{width} {height}\n");
    for row in 0..height {
        // image rows run top to bottom: y from +n down to -n
        for col in 0..width {
            let idx = match w.window.ring.degree() {
                1 => col,
                _ => col * side + (height - 1 - row),
            };
            let bit = match w.values[idx] {
                Cell::One => 0, // free = white
                _ => 1,         // multiple = black
            };
            out.push_str(&format!("{bit} "));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Portable graymap (P2): 0 for multiples, 255 for free, 128 for holes.
pub fn window_pgm(w: &EtaWindow) -> String {
    let side = 2 * w.window.radius as usize + 1;
    let (width, height) = match w.window.ring.degree() {
        1 => (side, 1),
        _ => (side, side),
    };
    let mut out = format!("P2\n{width} {height}\n255\n");
    for row in 0..height {
        for col in 0..width {
            let idx = match w.window.ring.degree() {
                1 => col,
                _ => col * side + (height - 1 - row),
            };
            let v = match w.values[idx] {
                Cell::Zero => 0,
                Cell::One => 255,
                Cell::Hole => 128,
            };
            out.push_str(&format!("{v} "));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_config_round_trip() {
        let caps = Caps::default();
        let z = RingOfIntegers::rational();
        for fam in [
            BFamily::finite(z, vec![Ideal::from_int(z, 4), Ideal::from_int(z, 6)]).unwrap(),
            BFamily::prime_squares(z),
            BFamily::scaled_primes(Ideal::from_int(z, 2), vec![], &caps).unwrap(),
            BFamily::powers_times_coprime(vec![3, 5, 7]).unwrap(),
        ] {
            let cfg = FamilyConfig::of(&fam);
            let s = serde_json::to_string(&cfg).unwrap();
            let back: FamilyConfig = serde_json::from_str(&s).unwrap();
            let fam2 = back.into_family(z, &caps).unwrap();
            assert_eq!(fam, fam2, "{s}");
        }
    }

    #[test]
    fn gaussian_ideal_config() {
        let caps = Caps::default();
        let zi = RingOfIntegers::gaussian();
        let opi = Ideal::principal(zi, &zi.element(1, 1));
        let fam = BFamily::finite(zi, vec![opi]).unwrap();
        let cfg = FamilyConfig::of(&fam);
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(
            s,
            r#"{"variant":"finite","members":[{"a":2,"b":1,"c":1}]}"#
        );
        let back: FamilyConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back.into_family(zi, &caps).unwrap(), fam);
    }

    #[test]
    fn config_hash_is_deterministic() {
        let cfg = RunConfig {
            command: "eta".into(),
            ring: RingOfIntegers::rational(),
            family: Some(FamilyConfig::PrimeSquares),
            radius: 10,
            stages: 3,
            caps: CapsConfig::of(&Caps::default()),
            seed: 42,
        };
        assert_eq!(config_hash(&cfg), config_hash(&cfg.clone()));
        let mut other = cfg.clone();
        other.seed = 43;
        assert_ne!(config_hash(&cfg), config_hash(&other));
    }

    #[test]
    fn pbm_and_csv_render() {
        let caps = Caps::default();
        let z = RingOfIntegers::rational();
        let fam = BFamily::finite(z, vec![Ideal::from_int(z, 2)]).unwrap();
        let w = fam.eta_window(&z.folner_box(2), &z.zero(), &caps).unwrap();
        let csv = window_csv(&w);
        assert!(csv.starts_with("x,y,value\n-2,0,0\n-1,0,1\n"));
        let pbm = window_pbm(&w).unwrap();
        assert!(pbm.starts_with("P1\n5 1\n"));

        let zi = RingOfIntegers::gaussian();
        let fam = BFamily::prime_squares(zi);
        let w = fam.eta_window(&zi.folner_box(3), &zi.zero(), &caps).unwrap();
        let pbm = window_pbm(&w).unwrap();
        assert!(pbm.starts_with("P1\n7 7\n"));
        let pgm = window_pgm(&w);
        assert!(pgm.starts_with("P2\n7 7\n255\n"));
    }
}
