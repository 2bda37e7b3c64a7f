//! Logistic model over rule features, trained by full-batch gradient descent.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logs.
pub const EPS: f64 = 1e-7;

/// Rows are training queries, columns are candidate rules.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: Vec<Vec<f64>>,
    labels: Vec<f64>,
    cols: usize,
}

impl FeatureMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<bool>) -> Result<FeatureMatrix> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), got: labels.len() });
        }
        let cols = rows.first().map_or(0, Vec::len);
        for r in &rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            if let Some(v) = r.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidParameter(format!("feature value {v} outside [0, 1]")));
            }
        }
        let labels = labels.into_iter().map(|y| if y { 1.0 } else { 0.0 }).collect();
        Ok(FeatureMatrix { rows, labels, cols })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i] == 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub theta: Vec<f64>,
    pub bias: f64,
}

impl ModelParams {
    pub fn zeros(n: usize) -> ModelParams {
        ModelParams { theta: vec![0.0; n], bias: 0.0 }
    }
}

fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Clamped logistic of `bias + theta . row`.
pub fn score(row: &[f64], params: &ModelParams) -> Result<f64> {
    if row.len() != params.theta.len() {
        return Err(Error::DimensionMismatch { expected: params.theta.len(), got: row.len() });
    }
    let z = params.bias + row.iter().zip(&params.theta).map(|(r, t)| r * t).sum::<f64>();
    Ok(logistic(z).clamp(EPS, 1.0 - EPS))
}

fn check_dims(m: &FeatureMatrix, params: &ModelParams) -> Result<()> {
    if m.cols != params.theta.len() && m.num_rows() > 0 {
        return Err(Error::DimensionMismatch { expected: params.theta.len(), got: m.cols });
    }
    Ok(())
}

/// Mean cross-entropy plus `l2 * |theta|^2`.
pub fn loss(m: &FeatureMatrix, params: &ModelParams, l2: f64) -> Result<f64> {
    check_dims(m, params)?;
    let mut total = 0.0;
    for (row, &y) in m.rows.iter().zip(&m.labels) {
        let f = score(row, params)?;
        total -= y * f.ln() + (1.0 - y) * (1.0 - f).ln();
    }
    let mean = if m.rows.is_empty() { 0.0 } else { total / m.rows.len() as f64 };
    Ok(mean + l2 * params.theta.iter().map(|t| t * t).sum::<f64>())
}

/// Analytic gradient of [`loss`]; returns `(d theta, d bias)`.
///
/// Uses the unclamped derivative `f - y`, which agrees with the loss wherever the
/// clamp is inactive.
pub fn gradient(m: &FeatureMatrix, params: &ModelParams, l2: f64) -> Result<(Vec<f64>, f64)> {
    check_dims(m, params)?;
    let n = m.rows.len().max(1) as f64;
    let mut g = vec![0.0; params.theta.len()];
    let mut gb = 0.0;
    for (row, &y) in m.rows.iter().zip(&m.labels) {
        let d = score(row, params)? - y;
        gb += d;
        for (gi, r) in g.iter_mut().zip(row) {
            *gi += d * r;
        }
    }
    for (gi, t) in g.iter_mut().zip(&params.theta) {
        *gi = *gi / n + 2.0 * l2 * t;
    }
    Ok((g, gb / n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub lr: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams { lr: 0.1, epochs: 500, l2: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub params: ModelParams,
    /// Loss before each update followed by the final loss (`epochs + 1` values).
    pub losses: Vec<f64>,
}

pub fn train(m: &FeatureMatrix, hyper: &TrainParams) -> Result<TrainOutput> {
    if !(hyper.lr > 0.0 && hyper.lr.is_finite()) {
        return Err(Error::InvalidParameter(format!("lr must be positive, got {}", hyper.lr)));
    }
    if hyper.epochs == 0 {
        return Err(Error::InvalidParameter("epochs must be at least 1".into()));
    }
    if !(hyper.l2 >= 0.0 && hyper.l2.is_finite()) {
        return Err(Error::InvalidParameter(format!("l2 must be non-negative, got {}", hyper.l2)));
    }
    let mut params = ModelParams::zeros(m.num_cols());
    let mut losses = Vec::with_capacity(hyper.epochs + 1);
    for epoch in 0..=hyper.epochs {
        let l = loss(m, &params, hyper.l2)?;
        if !l.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, loss: l });
        }
        losses.push(l);
        if epoch == hyper.epochs {
            break;
        }
        let (g, gb) = gradient(m, &params, hyper.l2)?;
        for (t, gi) in params.theta.iter_mut().zip(&g) {
            *t -= hyper.lr * gi;
        }
        params.bias -= hyper.lr * gb;
    }
    Ok(TrainOutput { params, losses })
}

pub fn accuracy(m: &FeatureMatrix, params: &ModelParams) -> Result<f64> {
    if m.num_rows() == 0 {
        return Ok(0.0);
    }
    let mut right = 0;
    for i in 0..m.num_rows() {
        if (score(m.row(i), params)? >= 0.5) == m.label(i) {
            right += 1;
        }
    }
    Ok(right as f64 / m.num_rows() as f64)
}

/// Text form: `bias <v>` then one `<signature> <weight>` line per rule.
pub fn write_model(params: &ModelParams, signatures: &[String]) -> Result<String> {
    if signatures.len() != params.theta.len() {
        return Err(Error::DimensionMismatch { expected: params.theta.len(), got: signatures.len() });
    }
    let mut s = format!("bias {:.16e}\n", params.bias);
    for (sig, w) in signatures.iter().zip(&params.theta) {
        writeln!(s, "{sig} {w:.16e}").unwrap();
    }
    Ok(s)
}

pub fn read_model(text: &str) -> Result<(ModelParams, Vec<String>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let parse_num = |line: usize, v: &str| {
        v.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Parse { line: line + 1, msg: format!("bad weight `{v}`") })
    };
    let (n, first) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty model file".into() })?;
    let bias = match first.trim().split_once(' ') {
        Some(("bias", v)) => parse_num(n, v.trim())?,
        _ => return Err(Error::Parse { line: n + 1, msg: "expected `bias <value>`".into() }),
    };
    let mut theta = Vec::new();
    let mut sigs = Vec::new();
    for (n, line) in lines {
        let (sig, w) = line
            .trim()
            .rsplit_once(' ')
            .ok_or_else(|| Error::Parse { line: n + 1, msg: "expected `<signature> <weight>`".into() })?;
        theta.push(parse_num(n, w)?);
        sigs.push(sig.trim().to_string());
    }
    Ok((ModelParams { theta, bias }, sigs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FeatureMatrix {
        FeatureMatrix::new(
            vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![0.0, 0.0]],
            vec![true, true, false, false],
        )
        .unwrap()
    }

    #[test]
    fn score_examples() {
        let p = ModelParams::zeros(3);
        assert_eq!(score(&[1.0, 0.0, 1.0], &p).unwrap(), 0.5);
        let p = ModelParams { theta: vec![10.0], bias: 0.0 };
        assert!((score(&[1.0], &p).unwrap() - 1.0 / (1.0 + (-10f64).exp())).abs() < 1e-15);
        assert_eq!(score(&[0.0], &p).unwrap(), 0.5);
        assert!(score(&[1.0, 1.0], &p).is_err());
        let p = ModelParams { theta: vec![1e6], bias: 0.0 };
        assert_eq!(score(&[1.0], &p).unwrap(), 1.0 - EPS);
    }

    #[test]
    fn loss_examples() {
        let m = toy();
        assert!((loss(&m, &ModelParams::zeros(2), 0.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        let p = ModelParams { theta: vec![1.0, 1.0], bias: 0.0 };
        let diff = loss(&m, &p, 0.1).unwrap() - loss(&m, &p, 0.0).unwrap();
        assert!((diff - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let m = FeatureMatrix::new(vec![vec![1.0, 0.0]; 4], vec![true, false, true, false]).unwrap();
        let (g, gb) = gradient(&m, &ModelParams::zeros(2), 0.0).unwrap();
        assert_eq!(gb, 0.0);
        assert_eq!(g, vec![0.0, 0.0]);
        let p = ModelParams { theta: vec![0.3, -0.7], bias: 0.1 };
        let (g, _) = gradient(&m, &p, 0.5).unwrap();
        assert_eq!(g[1], 2.0 * 0.5 * -0.7);
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let m = toy();
        let out = train(&m, &TrainParams { lr: 0.5, epochs: 500, l2: 0.0 }).unwrap();
        assert_eq!(accuracy(&m, &out.params).unwrap(), 1.0);
        assert!(*out.losses.last().unwrap() < 0.05);
        assert_eq!(out.losses.len(), 501);
        assert!(out.losses.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn training_preconditions() {
        let m = toy();
        assert!(train(&m, &TrainParams { epochs: 0, ..Default::default() }).is_err());
        assert!(train(&m, &TrainParams { lr: 0.0, ..Default::default() }).is_err());
        assert!(train(&m, &TrainParams { l2: -1.0, ..Default::default() }).is_err());
        let a = train(&m, &TrainParams::default()).unwrap();
        let b = train(&m, &TrainParams::default()).unwrap();
        assert_eq!(a.losses, b.losses);
    }

    #[test]
    fn matrix_validation() {
        assert!(FeatureMatrix::new(vec![vec![1.0], vec![1.0, 0.0]], vec![true, false]).is_err());
        assert!(FeatureMatrix::new(vec![vec![1.5]], vec![true]).is_err());
        assert!(FeatureMatrix::new(vec![vec![1.0]], vec![true, false]).is_err());
    }

    #[test]
    fn model_text_round_trip() {
        let p = ModelParams { theta: vec![0.1, -2.5e-9], bias: 1.0 / 3.0 };
        let sigs = vec!["L() <- A(X0,X1)".to_string(), "L() <- A(X0,X1) , B(X1,X2)".to_string()];
        let text = write_model(&p, &sigs).unwrap();
        assert!(text.starts_with("bias 3.3333333333333331e-1\n"));
        let (q, s) = read_model(&text).unwrap();
        assert_eq!(q, p);
        assert_eq!(s, sigs);
        assert!(read_model("weights 1").is_err());
        assert!(read_model("bias 0\nsig nan").is_err());
    }
}
