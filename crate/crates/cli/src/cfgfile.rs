//! Flat `key = value` configuration files.
//!
//! One line per field, `#` comments and blank lines allowed. Powers accept
//! either a `*_w` or a `*_dbm` spelling (exactly one); everything is held
//! in Watts internally. [`emit`] writes the canonical form, and
//! `load(emit(cfg)) == cfg` holds bit-for-bit because floats print in
//! shortest round-trip notation.

use std::collections::BTreeMap;

use fasrelay_core::config::{dbm_to_watts, Scenario, SystemConfig};
use fasrelay_core::geometry::UrbanExcess;
use fasrelay_core::mc::{HeadingMode, McMode};

/// A configuration error with the offending key or line spelled out.
#[derive(Debug)]
pub struct CfgError(pub String);

impl std::fmt::Display for CfgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CfgError {}

type CfgResult<T> = Result<T, CfgError>;

fn err<T>(msg: impl Into<String>) -> CfgResult<T> {
    Err(CfgError(msg.into()))
}

/// Raw key/value view of a config document, preserving nothing but the
/// bindings themselves.
struct Doc {
    values: BTreeMap<String, String>,
}

impl Doc {
    fn parse(text: &str) -> CfgResult<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`, got `{raw}`", idx + 1));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if value.is_empty() {
                return err(format!("{key}: empty value"));
            }
            if values.insert(key.clone(), value).is_some() {
                return err(format!("{key}: set more than once"));
            }
        }
        Ok(Doc { values })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn f64(&mut self, key: &str) -> CfgResult<f64> {
        match self.take(key) {
            None => err(format!("{key}: missing")),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| CfgError(format!("{key}: `{v}` is not a number"))),
        }
    }

    fn integer<T: std::str::FromStr>(&mut self, key: &str) -> CfgResult<T> {
        match self.take(key) {
            None => err(format!("{key}: missing")),
            Some(v) => v
                .parse::<T>()
                .map_err(|_| CfgError(format!("{key}: `{v}` is not a whole number"))),
        }
    }

    /// A power given as exactly one of `<base>_w` or `<base>_dbm`.
    fn power_w(&mut self, base: &str) -> CfgResult<f64> {
        let w_key = format!("{base}_w");
        let dbm_key = format!("{base}_dbm");
        let w = self.take(&w_key);
        let dbm = self.take(&dbm_key);
        match (w, dbm) {
            (Some(_), Some(_)) => {
                err(format!("{w_key} and {dbm_key} are both set; give exactly one"))
            }
            (Some(v), None) => v
                .parse::<f64>()
                .map_err(|_| CfgError(format!("{w_key}: `{v}` is not a number"))),
            (None, Some(v)) => v
                .parse::<f64>()
                .map(dbm_to_watts)
                .map_err(|_| CfgError(format!("{dbm_key}: `{v}` is not a number"))),
            (None, None) => err(format!("{w_key} (or {dbm_key}): missing")),
        }
    }
}

/// Parses and validates a configuration document.
pub fn load(text: &str) -> CfgResult<SystemConfig<f64>> {
    let mut doc = Doc::parse(text)?;

    let scenario = match doc.take("scenario").as_deref() {
        None => return err("scenario: missing"),
        Some("rural") => Scenario::Rural,
        Some("urban") => Scenario::Urban,
        Some(other) => return err(format!("scenario: `{other}` is neither rural nor urban")),
    };

    // Start from the matching preset so the fields with no file spelling
    // (heading mode aside, there are none) keep their defaults, then
    // overwrite every keyed field.
    let mut cfg = match scenario {
        Scenario::Rural => SystemConfig::<f64>::rural_preset(),
        Scenario::Urban => SystemConfig::<f64>::urban_preset(),
    };
    cfg.scenario = scenario;

    cfg.placement.bs = [
        doc.f64("placement.bs_x")?,
        doc.f64("placement.bs_y")?,
        doc.f64("placement.bs_z")?,
    ];
    cfg.placement.ue = [
        doc.f64("placement.ue_x")?,
        doc.f64("placement.ue_y")?,
        doc.f64("placement.ue_z")?,
    ];
    cfg.placement.uav_radius = doc.f64("placement.uav_radius")?;
    cfg.placement.uav_altitude = doc.f64("placement.uav_altitude")?;

    cfg.radio.carrier_freq_hz = doc.f64("radio.carrier_freq_hz")?;
    cfg.radio.noise_power_w = doc.power_w("radio.noise_power")?;
    cfg.radio.p1_w = doc.power_w("radio.p1")?;
    cfg.radio.p2_w = doc.power_w("radio.p2")?;

    cfg.fas.n_ports = doc.integer("fas.n_ports")?;
    cfg.fas.aperture = doc.f64("fas.aperture")?;

    cfg.payload_bits = doc.integer("fbl.payload_bits")?;
    cfg.blocklength = doc.integer("fbl.blocklength")?;
    cfg.m1 = doc.integer("nakagami.m1")?;
    cfg.m2 = doc.integer("nakagami.m2")?;

    cfg.urban = match scenario {
        Scenario::Rural => None,
        Scenario::Urban => Some(UrbanExcess {
            eta_los_db: doc.f64("urban.eta_los_db")?,
            eta_nlos_db: doc.f64("urban.eta_nlos_db")?,
            a: doc.f64("urban.a")?,
            b: doc.f64("urban.b")?,
            m_los: doc.integer("urban.m_los")?,
            m_nlos: doc.integer("urban.m_nlos")?,
        }),
    };

    cfg.ee.p_c_w = doc.power_w("ee.p_c")?;
    cfg.ee.p_sw_w = doc.power_w("ee.p_sw")?;
    cfg.ee.tau_p_s = doc.f64("ee.tau_p_s")?;
    cfg.ee.w_band_hz = doc.f64("ee.w_band_hz")?;
    // The energy model always accounts the payload the code carries.
    cfg.ee.payload_bits = cfg.payload_bits;

    cfg.heading_order = doc.integer("quadrature.heading_order")?;
    cfg.mc.trials = doc.integer("mc.trials")?;
    cfg.mc.seed = doc.integer("mc.seed")?;
    cfg.mc.mode = match doc.take("mc.mode").as_deref() {
        None | Some("analytical") => McMode::AnalyticalModel,
        Some("physical") => McMode::PhysicalPorts,
        Some(other) => {
            return err(format!("mc.mode: `{other}` is neither analytical nor physical"))
        }
    };
    cfg.mc.headings = match doc.take("mc.heading").as_deref() {
        None | Some("uniform") => HeadingMode::UniformRandom,
        Some(v) => match v.parse::<f64>() {
            Ok(theta) => HeadingMode::FixedTheta(theta),
            Err(_) => {
                return err(format!(
                    "mc.heading: `{v}` is neither `uniform` nor a heading in radians"
                ))
            }
        },
    };
    cfg.rank_tol = doc.f64("correlation.rank_tol")?;

    if let Some((key, _)) = doc.values.iter().next() {
        return err(format!("{key}: unknown key"));
    }
    cfg.validate().map_err(|e| CfgError(e.to_string()))?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn load_path(path: &std::path::Path) -> CfgResult<SystemConfig<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CfgError(format!("{}: {e}", path.display())))?;
    load(&text)
}

/// Writes the canonical form of a configuration. Floats use shortest
/// round-trip notation, so loading the output reproduces the input
/// config exactly.
pub fn emit(cfg: &SystemConfig<f64>) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    let scenario = match cfg.scenario {
        Scenario::Rural => "rural",
        Scenario::Urban => "urban",
    };
    line("scenario", scenario.into());
    line("placement.bs_x", cfg.placement.bs[0].to_string());
    line("placement.bs_y", cfg.placement.bs[1].to_string());
    line("placement.bs_z", cfg.placement.bs[2].to_string());
    line("placement.ue_x", cfg.placement.ue[0].to_string());
    line("placement.ue_y", cfg.placement.ue[1].to_string());
    line("placement.ue_z", cfg.placement.ue[2].to_string());
    line("placement.uav_radius", cfg.placement.uav_radius.to_string());
    line("placement.uav_altitude", cfg.placement.uav_altitude.to_string());
    line("radio.carrier_freq_hz", cfg.radio.carrier_freq_hz.to_string());
    line("radio.noise_power_w", cfg.radio.noise_power_w.to_string());
    line("radio.p1_w", cfg.radio.p1_w.to_string());
    line("radio.p2_w", cfg.radio.p2_w.to_string());
    line("fas.n_ports", cfg.fas.n_ports.to_string());
    line("fas.aperture", cfg.fas.aperture.to_string());
    line("fbl.payload_bits", cfg.payload_bits.to_string());
    line("fbl.blocklength", cfg.blocklength.to_string());
    line("nakagami.m1", cfg.m1.to_string());
    line("nakagami.m2", cfg.m2.to_string());
    if let Some(u) = &cfg.urban {
        line("urban.eta_los_db", u.eta_los_db.to_string());
        line("urban.eta_nlos_db", u.eta_nlos_db.to_string());
        line("urban.a", u.a.to_string());
        line("urban.b", u.b.to_string());
        line("urban.m_los", u.m_los.to_string());
        line("urban.m_nlos", u.m_nlos.to_string());
    }
    line("ee.p_c_w", cfg.ee.p_c_w.to_string());
    line("ee.p_sw_w", cfg.ee.p_sw_w.to_string());
    line("ee.tau_p_s", cfg.ee.tau_p_s.to_string());
    line("ee.w_band_hz", cfg.ee.w_band_hz.to_string());
    line("quadrature.heading_order", cfg.heading_order.to_string());
    line("mc.trials", cfg.mc.trials.to_string());
    line("mc.seed", cfg.mc.seed.to_string());
    let mode = match cfg.mc.mode {
        McMode::AnalyticalModel => "analytical",
        McMode::PhysicalPorts => "physical",
    };
    line("mc.mode", mode.into());
    let heading = match cfg.mc.headings {
        HeadingMode::UniformRandom => "uniform".to_string(),
        HeadingMode::FixedTheta(theta) => theta.to_string(),
    };
    line("mc.heading", heading);
    line("correlation.rank_tol", cfg.rank_tol.to_string());
    out
}

/// FNV-1a hash of the canonical config text; stamped into CSV metadata so
/// outputs are traceable to their exact inputs.
pub fn config_hash(cfg: &SystemConfig<f64>) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in emit(cfg).bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_losslessly() {
        for cfg in [SystemConfig::<f64>::rural_preset(), SystemConfig::<f64>::urban_preset()] {
            let text = emit(&cfg);
            let back = load(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(emit(&back), text);
        }
    }

    #[test]
    fn dbm_spellings_convert_to_watts() {
        let mut text = emit(&SystemConfig::<f64>::rural_preset());
        text = text.replace(
            "radio.noise_power_w = 0.0000000000001",
            "radio.noise_power_dbm = -100",
        );
        let cfg = load(&text).unwrap();
        assert!((cfg.radio.noise_power_w - 1e-13).abs() < 1e-27);
    }

    #[test]
    fn conflicting_power_spellings_are_rejected() {
        let mut text = emit(&SystemConfig::<f64>::rural_preset());
        text.push_str("radio.p1_dbm = 10\n");
        let msg = load(&text).unwrap_err().to_string();
        assert!(msg.contains("radio.p1_w") && msg.contains("radio.p1_dbm"), "{msg}");
    }

    #[test]
    fn unknown_missing_and_malformed_keys_name_themselves() {
        let mut text = emit(&SystemConfig::<f64>::rural_preset());
        text.push_str("typo.key = 3\n");
        assert!(load(&text).unwrap_err().to_string().contains("typo.key"));

        let text = emit(&SystemConfig::<f64>::rural_preset())
            .replace("fas.n_ports = 2\n", "");
        assert!(load(&text).unwrap_err().to_string().contains("fas.n_ports"));

        let text = emit(&SystemConfig::<f64>::rural_preset())
            .replace("nakagami.m1 = 7", "nakagami.m1 = 7.5");
        let msg = load(&text).unwrap_err().to_string();
        assert!(msg.contains("nakagami.m1") && msg.contains("whole number"), "{msg}");
    }

    #[test]
    fn core_validation_failures_surface_with_their_key() {
        let text = emit(&SystemConfig::<f64>::rural_preset())
            .replace("fas.aperture = 0.5", "fas.aperture = -1");
        let msg = load(&text).unwrap_err().to_string();
        assert!(msg.contains("fas.aperture"), "{msg}");
    }

    #[test]
    fn urban_keys_are_rejected_in_rural_scenario() {
        let mut text = emit(&SystemConfig::<f64>::rural_preset());
        text.push_str("urban.a = 12\n");
        let msg = load(&text).unwrap_err().to_string();
        assert!(msg.contains("urban.a") && msg.contains("unknown"), "{msg}");
    }

    #[test]
    fn hash_tracks_content_not_identity() {
        let a = SystemConfig::<f64>::rural_preset();
        let mut b = a.clone();
        assert_eq!(config_hash(&a), config_hash(&b));
        b.blocklength = 200;
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
