//! `--sweep` specs: `key=v1,v2;key=v3`, expanded to the cartesian product.

use std::collections::BTreeMap;

pub const KEYS: [&str; 6] = ["D", "s", "m", "k", "c", "kp"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    axes: Vec<(String, Vec<usize>)>,
}

impl Sweep {
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut axes: Vec<(String, Vec<usize>)> = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, values) = part
                .split_once('=')
                .ok_or_else(|| format!("sweep term {part:?} is not key=values"))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(format!(
                    "unknown sweep key {key:?}, expected one of {}",
                    KEYS.join(", ")
                ));
            }
            if axes.iter().any(|(k, _)| k == key) {
                return Err(format!("sweep key {key:?} given twice"));
            }
            let values = values
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| format!("bad value {v:?} for sweep key {key:?}"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if values.is_empty() {
                return Err(format!("sweep key {key:?} has no values"));
            }
            axes.push((key.to_string(), values));
        }
        if axes.is_empty() {
            return Err("empty sweep".into());
        }
        Ok(Self { axes })
    }

    /// Every configuration, with the last axis varying fastest.
    pub fn points(&self) -> Vec<BTreeMap<String, usize>> {
        let mut out = vec![BTreeMap::new()];
        for (key, values) in &self.axes {
            out = out
                .into_iter()
                .flat_map(|base| {
                    values.iter().map(move |&v| {
                        let mut p = base.clone();
                        p.insert(key.clone(), v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}
