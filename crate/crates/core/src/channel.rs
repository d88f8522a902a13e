//! Block-fading geometric mmWave channel generation: the BS->RIS matrix H
//! and the RIS->user vectors h_k, built from uniform-linear / uniform-planar
//! array steering vectors.

use crate::numerics::{kron_vec, Complex, ComplexMatrix, RngStream};
use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};

/// Static system dimensions and link budget, shared by every module.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    /// BS antenna count N_t.
    pub n_t: usize,
    /// RF chain count N_RF; equals the user count and stream count.
    pub n_rf: usize,
    /// User count K.
    pub k_users: usize,
    /// RIS element count M.
    pub m_ris: usize,
    /// RIS grid azimuth dimension; m_az * m_el must equal m_ris.
    pub m_az: usize,
    /// RIS grid elevation dimension.
    pub m_el: usize,
    /// Multipath count L.
    pub n_paths: usize,
    /// Transmit power P (linear scale).
    pub power: f64,
    /// Noise variance sigma^2 (linear scale).
    pub noise_var: f64,
    /// Element spacing over wavelength, d0/lambda.
    pub spacing_ratio: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::desk_scale()
    }
}

impl SystemConfig {
    /// Desk-scale default used throughout tests: small enough that training
    /// and brute-force references run in minutes.
    pub fn desk_scale() -> Self {
        Self::with_dims(8, 2, 16)
    }

    /// Dimensions with the remaining fields at their defaults. Requires a
    /// perfect-square RIS element count.
    pub fn with_dims(n_t: usize, n_rf: usize, m_ris: usize) -> Self {
        let side = (m_ris as f64).sqrt().round() as usize;
        assert_eq!(side * side, m_ris, "m_ris must be a perfect square here");
        Self {
            n_t,
            n_rf,
            k_users: n_rf,
            m_ris,
            m_az: side,
            m_el: side,
            n_paths: 4,
            power: 10.0,
            noise_var: 1.0,
            spacing_ratio: 0.5,
        }
    }

    /// Streams N_s = K = N_RF.
    pub fn n_streams(&self) -> usize {
        self.n_rf
    }

    /// Set P from an SNR in dB with sigma^2 fixed: P = noise_var * 10^(dB/10).
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.power = self.noise_var * 10f64.powf(snr_db / 10.0);
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        if self.k_users != self.n_rf {
            problems.push(format!(
                "k_users ({}) must equal n_rf ({})",
                self.k_users, self.n_rf
            ));
        }
        if self.m_az * self.m_el != self.m_ris {
            problems.push(format!(
                "m_az * m_el ({}x{}) must equal m_ris ({})",
                self.m_az, self.m_el, self.m_ris
            ));
        }
        if self.n_paths == 0 {
            problems.push("n_paths must be >= 1".into());
        }
        if !(self.power > 0.0) {
            problems.push(format!("power must be > 0, got {}", self.power));
        }
        if !(self.noise_var > 0.0) {
            problems.push(format!("noise_var must be > 0, got {}", self.noise_var));
        }
        if self.n_t == 0 || self.n_rf == 0 || self.m_ris == 0 {
            problems.push("n_t, n_rf, m_ris must all be >= 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

/// Angles and gain of one propagation path.
#[derive(Debug, Clone)]
pub struct PathParams {
    pub gain: Complex,
    pub aod_bs: f64,
    pub aoa_ris_az: f64,
    pub aoa_ris_el: f64,
    pub aod_ris_az: f64,
    pub aod_ris_el: f64,
}

/// One block-fading draw: H (M x N_t) and the K user vectors h_k (length M).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h_bs_ris: ComplexMatrix,
    pub h_ris_user: Vec<Vec<Complex>>,
    pub paths: Vec<PathParams>,
}

impl ChannelRealization {
    /// H_r = [h_1, ..., h_K], M x K.
    pub fn h_r(&self) -> ComplexMatrix {
        let m = self.h_bs_ris.rows();
        let k = self.h_ris_user.len();
        let mut out = ComplexMatrix::zeros(m, k);
        for (j, h) in self.h_ris_user.iter().enumerate() {
            for (i, &z) in h.iter().enumerate() {
                out[(i, j)] = z;
            }
        }
        out
    }
}

/// Uniform linear array steering vector, entry p = exp(-j*2*pi*(d0/lambda)*p*cos(angle))/sqrt(n).
pub fn steering_vector(n: usize, angle: f64, spacing_ratio: f64) -> Vec<Complex> {
    assert!(n >= 1);
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|p| {
            let phase = -TAU * spacing_ratio * p as f64 * angle.cos();
            Complex::from_polar(norm, phase)
        })
        .collect()
}

/// RIS planar-array steering vector: a(m_az, az) kron a(m_el, el).
pub fn ris_steering(m_az: usize, m_el: usize, az: f64, el: f64, spacing_ratio: f64) -> Vec<Complex> {
    let a = steering_vector(m_az, az, spacing_ratio);
    let b = steering_vector(m_el, el, spacing_ratio);
    kron_vec(&a, &b)
}

// azimuths uniform on [0, 2pi), elevations uniform on [0, pi)
fn sample_path(rng: &mut RngStream) -> PathParams {
    PathParams {
        gain: rng.sample_cn01(),
        aod_bs: rng.uniform_range(0.0, TAU),
        aoa_ris_az: rng.uniform_range(0.0, TAU),
        aoa_ris_el: rng.uniform_range(0.0, PI),
        aod_ris_az: rng.uniform_range(0.0, TAU),
        aod_ris_el: rng.uniform_range(0.0, PI),
    }
}

/// Draw one block-fading realization.
///
/// H = sqrt(N_t*M/L) * sum_l gain_l * a_bs(phi_l) a_ris^T(theta_al, phi_al);
/// h_k = sqrt(M/L) * sum_l gain_{k,l} * a_ris(theta_dl, phi_dl), with gains
/// and angles independent per user. The h_k prefactor uses M (array gain of
/// an M-element response), not the antenna count of the far end.
pub fn sample_channel(cfg: &SystemConfig, rng: &mut RngStream) -> ChannelRealization {
    let l = cfg.n_paths;
    let mut paths = Vec::with_capacity(l);
    let mut h = ComplexMatrix::zeros(cfg.m_ris, cfg.n_t);
    let h_scale = ((cfg.n_t * cfg.m_ris) as f64 / l as f64).sqrt();
    for _ in 0..l {
        let p = sample_path(rng);
        let a_bs = steering_vector(cfg.n_t, p.aod_bs, cfg.spacing_ratio);
        let a_ris = ris_steering(cfg.m_az, cfg.m_el, p.aoa_ris_az, p.aoa_ris_el, cfg.spacing_ratio);
        // rank-one outer product a_ris * a_bs^T (transpose, not conjugate)
        for i in 0..cfg.m_ris {
            let left = p.gain * a_ris[i] * h_scale;
            for j in 0..cfg.n_t {
                h[(i, j)] += left * a_bs[j];
            }
        }
        paths.push(p);
    }

    let hk_scale = (cfg.m_ris as f64 / l as f64).sqrt();
    let mut h_ris_user = Vec::with_capacity(cfg.k_users);
    for _ in 0..cfg.k_users {
        let mut hk = vec![Complex::new(0.0, 0.0); cfg.m_ris];
        for _ in 0..l {
            let p = sample_path(rng);
            let a_ris = ris_steering(cfg.m_az, cfg.m_el, p.aod_ris_az, p.aod_ris_el, cfg.spacing_ratio);
            for (dst, &a) in hk.iter_mut().zip(&a_ris) {
                *dst += p.gain * a * hk_scale;
            }
            paths.push(p);
        }
        h_ris_user.push(hk);
    }

    ChannelRealization {
        h_bs_ris: h,
        h_ris_user,
        paths,
    }
}

/// Write one realization as plain text: a header line `<rows> <cols>` per
/// block, then one `re im` pair per entry, row-major. Blocks: H, then each h_k.
pub fn dump_realization<W: Write>(chan: &ChannelRealization, mut w: W) -> std::io::Result<()> {
    let h = &chan.h_bs_ris;
    writeln!(w, "{} {}", h.rows(), h.cols())?;
    for z in h.data() {
        writeln!(w, "{:.17e} {:.17e}", z.re, z.im)?;
    }
    for hk in &chan.h_ris_user {
        writeln!(w, "{} 1", hk.len())?;
        for z in hk {
            writeln!(w, "{:.17e} {:.17e}", z.re, z.im)?;
        }
    }
    Ok(())
}

/// Read a realization written by [`dump_realization`]. The user count is
/// inferred from the trailing blocks. Path parameters are not serialized.
pub fn load_realization<R: BufRead>(r: R) -> std::io::Result<ChannelRealization> {
    let mut lines = r.lines();
    let bad = |m: &str| std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string());
    let mut next_line = move || -> std::io::Result<Option<String>> {
        match lines.next() {
            Some(l) => Ok(Some(l?)),
            None => Ok(None),
        }
    };
    let header = next_line()?.ok_or_else(|| bad("empty channel dump"))?;
    let mut it = header.split_whitespace();
    let rows: usize = it.next().ok_or_else(|| bad("bad header"))?.parse().map_err(|_| bad("bad header"))?;
    let cols: usize = it.next().ok_or_else(|| bad("bad header"))?.parse().map_err(|_| bad("bad header"))?;
    let read_block = |rows: usize, cols: usize, next: &mut dyn FnMut() -> std::io::Result<Option<String>>| -> std::io::Result<Vec<Complex>> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            let line = next()?.ok_or_else(|| bad("truncated channel dump"))?;
            let mut p = line.split_whitespace();
            let re: f64 = p.next().ok_or_else(|| bad("bad entry"))?.parse().map_err(|_| bad("bad entry"))?;
            let im: f64 = p.next().ok_or_else(|| bad("bad entry"))?.parse().map_err(|_| bad("bad entry"))?;
            data.push(Complex::new(re, im));
        }
        Ok(data)
    };
    let h = ComplexMatrix::from_data(rows, cols, read_block(rows, cols, &mut next_line)?);
    let mut users = Vec::new();
    while let Some(header) = next_line()? {
        if header.trim().is_empty() {
            break;
        }
        let mut it = header.split_whitespace();
        let m: usize = it.next().ok_or_else(|| bad("bad header"))?.parse().map_err(|_| bad("bad header"))?;
        let one: usize = it.next().ok_or_else(|| bad("bad header"))?.parse().map_err(|_| bad("bad header"))?;
        if one != 1 {
            return Err(bad("user block must be a column vector"));
        }
        users.push(read_block(m, 1, &mut next_line)?);
    }
    Ok(ChannelRealization {
        h_bs_ris: h,
        h_ris_user: users,
        paths: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steering_single_element() {
        let a = steering_vector(1, 1.234, 0.5);
        assert_eq!(a.len(), 1);
        assert!((a[0] - Complex::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_broadside_flat() {
        // cos(pi/2) = 0: no phase progression, every entry 1/2
        let a = steering_vector(4, PI / 2.0, 0.5);
        for z in &a {
            assert!((z - Complex::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn steering_unit_norm() {
        let mut rng = RngStream::new(21);
        for _ in 0..20 {
            let n = 1 + (rng.next_u64() % 16) as usize;
            let a = steering_vector(n, rng.uniform_range(0.0, TAU), 0.5);
            let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ris_steering_degenerate_cases() {
        let a = ris_steering(1, 1, 0.3, 0.7, 0.5);
        assert_eq!(a.len(), 1);
        assert!((a[0] - Complex::new(1.0, 0.0)).norm() < 1e-15);

        let az = 0.9;
        let two = ris_steering(2, 1, az, 0.1, 0.5);
        let direct = steering_vector(2, az, 0.5);
        for (x, y) in two.iter().zip(&direct) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn ris_steering_unit_norm() {
        let mut rng = RngStream::new(22);
        for _ in 0..10 {
            let a = ris_steering(3, 4, rng.uniform_range(0.0, TAU), rng.uniform_range(0.0, PI), 0.5);
            let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_path_channel_is_rank_one() {
        let mut cfg = SystemConfig::with_dims(4, 2, 4);
        cfg.n_paths = 1;
        let mut rng = RngStream::new(23);
        let chan = sample_channel(&cfg, &mut rng);
        let h = &chan.h_bs_ris;
        // all 2x2 minors vanish for a rank-one matrix
        for i0 in 0..h.rows() {
            for i1 in i0 + 1..h.rows() {
                for j0 in 0..h.cols() {
                    for j1 in j0 + 1..h.cols() {
                        let det = h[(i0, j0)] * h[(i1, j1)] - h[(i0, j1)] * h[(i1, j0)];
                        assert!(det.norm() < 1e-10, "minor {}", det.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn channel_shapes() {
        let cfg = SystemConfig::desk_scale();
        let mut rng = RngStream::new(24);
        let chan = sample_channel(&cfg, &mut rng);
        assert_eq!(chan.h_bs_ris.rows(), cfg.m_ris);
        assert_eq!(chan.h_bs_ris.cols(), cfg.n_t);
        assert_eq!(chan.h_ris_user.len(), cfg.k_users);
        for hk in &chan.h_ris_user {
            assert_eq!(hk.len(), cfg.m_ris);
        }
        let hr = chan.h_r();
        assert_eq!((hr.rows(), hr.cols()), (cfg.m_ris, cfg.k_users));
        assert_eq!(hr.col_vec(1), chan.h_ris_user[1]);
    }

    #[test]
    fn channel_moments_match_normalization() {
        let cfg = SystemConfig::with_dims(4, 2, 4);
        let mut rng = RngStream::new(25);
        let draws = 1000;
        let mut h_power = 0.0;
        let mut hk_power = 0.0;
        for _ in 0..draws {
            let chan = sample_channel(&cfg, &mut rng);
            let f = chan.h_bs_ris.frobenius_norm();
            h_power += f * f;
            hk_power += chan.h_ris_user[0]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>();
        }
        h_power /= draws as f64;
        hk_power /= draws as f64;
        let expect_h = (cfg.n_t * cfg.m_ris) as f64;
        assert!((h_power - expect_h).abs() / expect_h < 0.1, "E||H||^2 = {h_power}");
        let expect_hk = cfg.m_ris as f64;
        assert!((hk_power - expect_hk).abs() / expect_hk < 0.1, "E||h_k||^2 = {hk_power}");
    }

    #[test]
    fn seeded_draws_reproducible() {
        let cfg = SystemConfig::desk_scale();
        let a = sample_channel(&cfg, &mut RngStream::new(77));
        let b = sample_channel(&cfg, &mut RngStream::new(77));
        assert_eq!(a.h_bs_ris, b.h_bs_ris);
        assert_eq!(a.h_ris_user, b.h_ris_user);
    }

    #[test]
    fn dump_load_round_trip() {
        let cfg = SystemConfig::with_dims(4, 2, 4);
        let chan = sample_channel(&cfg, &mut RngStream::new(31));
        let mut buf = Vec::new();
        dump_realization(&chan, &mut buf).unwrap();
        let back = load_realization(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(back.h_bs_ris, chan.h_bs_ris);
        assert_eq!(back.h_ris_user, chan.h_ris_user);
    }

    #[test]
    fn config_validation_names_bad_fields() {
        let mut cfg = SystemConfig::desk_scale();
        cfg.power = -1.0;
        cfg.m_az = 3;
        let err = cfg.validate().unwrap_err();
        assert!(err.contains("power"));
        assert!(err.contains("m_az"));
    }
}
