use std::fmt::Write as _;

use rand::Rng;

use crate::error::check_dim;
use crate::rng::{complex_normal, seeded};
use crate::{Error, Result, C64};

/// An `L`-RRH, `K`-user downlink.
#[derive(Debug, Clone, PartialEq)]
pub struct CranInstance {
    /// Antennas per RRH, `N_l`.
    pub antennas: Vec<usize>,
    /// `channels[l][k]` is `h_lk`, of length `N_l`.
    pub channels: Vec<Vec<Vec<C64>>>,
    /// Per-RRH transmit power budget `P_l` in watts.
    pub power_budget: Vec<f64>,
    /// Amplifier drain efficiency `eta_l` in `(0, 1]`.
    pub efficiency: Vec<f64>,
    /// Static fronthaul power `P^c_l` of an active RRH, in watts.
    pub fronthaul_power: Vec<f64>,
    /// Linear SINR targets `gamma_k`; zero means no QoS requirement.
    pub sinr_target: Vec<f64>,
    /// Noise powers `sigma^2_k` in watts.
    pub noise_power: Vec<f64>,
}

impl CranInstance {
    pub fn num_rrh(&self) -> usize {
        self.antennas.len()
    }

    pub fn num_users(&self) -> usize {
        self.sinr_target.len()
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.num_rrh();
        let k = self.num_users();
        check_dim("channels (RRHs)", l, self.channels.len())?;
        check_dim("power budgets", l, self.power_budget.len())?;
        check_dim("efficiencies", l, self.efficiency.len())?;
        check_dim("fronthaul powers", l, self.fronthaul_power.len())?;
        check_dim("noise powers", k, self.noise_power.len())?;
        for (li, row) in self.channels.iter().enumerate() {
            check_dim("channels (users)", k, row.len())?;
            for h in row {
                check_dim("channel length", self.antennas[li], h.len())?;
                if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::NonFinite(format!("channel of RRH {li}")));
                }
            }
        }
        if self.antennas.contains(&0) {
            return Err(Error::invalid("every RRH needs at least one antenna"));
        }
        let positive = |v: &[f64]| v.iter().all(|&x| x > 0.0 && x.is_finite());
        let nonneg = |v: &[f64]| v.iter().all(|&x| x >= 0.0 && x.is_finite());
        if !positive(&self.power_budget) || !positive(&self.noise_power) {
            return Err(Error::invalid("power budgets and noise powers must be positive"));
        }
        if !self.efficiency.iter().all(|&e| e > 0.0 && e <= 1.0) {
            return Err(Error::invalid("efficiencies must lie in (0, 1]"));
        }
        if !nonneg(&self.fronthaul_power) || !nonneg(&self.sinr_target) {
            return Err(Error::invalid("fronthaul powers and SINR targets must be nonnegative"));
        }
        Ok(())
    }

    /// `sum_k ||h_lk||^2`
    pub fn channel_energy(&self, l: usize) -> f64 {
        self.channels[l]
            .iter()
            .flat_map(|h| h.iter())
            .map(|c| c.norm_sqr())
            .sum()
    }

    /// Copy with every channel multiplied by `factor`.
    pub fn with_scaled_channels(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.channels {
            for h in row {
                h.iter_mut().for_each(|c| *c *= factor);
            }
        }
        out
    }

    /// Copy with every SINR target multiplied by `factor`.
    pub fn with_scaled_targets(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.sinr_target.iter_mut().for_each(|g| *g *= factor);
        out
    }

    /// Text form: `L K`, then one line each for `N_l`, `P_l`, `eta_l`,
    /// `P^c_l`, `gamma_k`, `sigma^2_k`, then one line per `(l, k)` pair in
    /// RRH-major order holding `h_lk` as interleaved real/imaginary parts.
    /// Lines starting with `#` are comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.num_rrh(), self.num_users());
        let line = |v: Vec<String>| v.join(" ");
        let _ = writeln!(out, "{}", line(self.antennas.iter().map(|n| n.to_string()).collect()));
        for v in [
            &self.power_budget,
            &self.efficiency,
            &self.fronthaul_power,
            &self.sinr_target,
            &self.noise_power,
        ] {
            let _ = writeln!(out, "{}", line(v.iter().map(|x| format!("{x:.16e}")).collect()));
        }
        for row in &self.channels {
            for h in row {
                let toks: Vec<String> = h
                    .iter()
                    .flat_map(|c| [format!("{:.16e}", c.re), format!("{:.16e}", c.im)])
                    .collect();
                let _ = writeln!(out, "{}", line(toks));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.starts_with('#'))
            .collect();
        let mut it = lines.into_iter();
        let mut next = |what: &str| {
            it.next()
                .ok_or_else(|| Error::parse(0, format!("missing {what}")))
        };
        let (ln, header) = next("header")?;
        let hdr: Vec<usize> = parse_tokens(header, ln)?;
        let [l, k] = hdr[..] else {
            return Err(Error::parse(ln, "header must be `L K`"));
        };
        let (ln, ant) = next("antenna counts")?;
        let antennas: Vec<usize> = parse_exact(ant, ln, l)?;
        let mut vecs = Vec::new();
        for (what, len) in [
            ("power budgets", l),
            ("efficiencies", l),
            ("fronthaul powers", l),
            ("SINR targets", k),
            ("noise powers", k),
        ] {
            let (ln, s) = next(what)?;
            vecs.push(parse_exact::<f64>(s, ln, len)?);
        }
        let mut channels = Vec::with_capacity(l);
        for &n in &antennas {
            let mut row = Vec::with_capacity(k);
            for _ in 0..k {
                let (ln, s) = next("channel")?;
                let v: Vec<f64> = parse_exact(s, ln, 2 * n)?;
                row.push(v.chunks(2).map(|p| C64::new(p[0], p[1])).collect());
            }
            channels.push(row);
        }
        let mut vecs = vecs.into_iter();
        let inst = CranInstance {
            antennas,
            channels,
            power_budget: vecs.next().unwrap(),
            efficiency: vecs.next().unwrap(),
            fronthaul_power: vecs.next().unwrap(),
            sinr_target: vecs.next().unwrap(),
            noise_power: vecs.next().unwrap(),
        };
        inst.validate()?;
        Ok(inst)
    }
}

fn parse_tokens<T: std::str::FromStr>(s: &str, line: usize) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::parse(line, format!("bad token `{t}`"))))
        .collect()
}

fn parse_exact<T: std::str::FromStr>(s: &str, line: usize, n: usize) -> Result<Vec<T>> {
    let v = parse_tokens(s, line)?;
    if v.len() != n {
        return Err(Error::parse(line, format!("expected {n} values, found {}", v.len())));
    }
    Ok(v)
}

/// Random CRAN layouts: RRHs and users uniform in the unit square, Rayleigh
/// fading on top of the path gain `1 / (1 + (d / d0)^3)`.
#[derive(Debug, Clone)]
pub struct CranGenerator {
    pub rrhs: usize,
    pub users: usize,
    pub antennas: usize,
    pub power_budget: f64,
    pub efficiency: f64,
    pub fronthaul_power: f64,
    pub sinr_db: f64,
    pub noise_power: f64,
    pub reference_distance: f64,
}

impl Default for CranGenerator {
    fn default() -> Self {
        CranGenerator {
            rrhs: 4,
            users: 3,
            antennas: 2,
            power_budget: 1.0,
            efficiency: 0.25,
            fronthaul_power: 5.0,
            sinr_db: 0.0,
            noise_power: 0.01,
            reference_distance: 0.2,
        }
    }
}

impl CranGenerator {
    pub fn generate(&self, seed: u64) -> CranInstance {
        let mut rng = seeded(seed);
        let point = |rng: &mut crate::rng::SeededRng| (rng.random::<f64>(), rng.random::<f64>());
        let rrh_pos: Vec<(f64, f64)> = (0..self.rrhs).map(|_| point(&mut rng)).collect();
        let user_pos: Vec<(f64, f64)> = (0..self.users).map(|_| point(&mut rng)).collect();
        let channels = rrh_pos
            .iter()
            .map(|&(rx, ry)| {
                user_pos
                    .iter()
                    .map(|&(ux, uy)| {
                        let d = ((rx - ux).powi(2) + (ry - uy).powi(2)).sqrt();
                        let gain = 1.0 / (1.0 + (d / self.reference_distance).powi(3));
                        (0..self.antennas).map(|_| complex_normal(&mut rng, gain)).collect()
                    })
                    .collect()
            })
            .collect();
        CranInstance {
            antennas: vec![self.antennas; self.rrhs],
            channels,
            power_budget: vec![self.power_budget; self.rrhs],
            efficiency: vec![self.efficiency; self.rrhs],
            fronthaul_power: vec![self.fronthaul_power; self.rrhs],
            sinr_target: vec![10f64.powf(self.sinr_db / 10.0); self.users],
            noise_power: vec![self.noise_power; self.users],
        }
    }
}
