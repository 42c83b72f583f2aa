//! Gauss rules on the unit segment and collapsed Gauss rules on the
//! reference triangle `{(ξ, η): ξ, η ≥ 0, ξ + η ≤ 1}`.

/// Quadrature rule with points in reference coordinates.
#[derive(Clone, Debug)]
pub struct Rule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
}

/// `n`-point Gauss-Legendre rule on `[0, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Rule<f64> {
    assert!(n >= 1, "gauss_legendre needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi's initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Rule { points, weights }
}

/// Legendre polynomial `P_n(x)` and its derivative on `[-1, 1]`.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint value n(n+1)/2 * x^(n+1)
        0.5 * (n * (n + 1)) as f64 * x.powi(n as i32 + 1)
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Segment rule exact for polynomials of degree `degree`.
pub fn segment_rule(degree: usize) -> Rule<f64> {
    gauss_legendre(degree / 2 + 1)
}

/// Triangle rule exact for polynomials of degree `degree`, built from the
/// Duffy map `(u, v) -> (u, (1 - u) v)`. Weights sum to 1/2.
pub fn triangle_rule(degree: usize) -> Rule<[f64; 2]> {
    // the Jacobian (1 - u) raises the degree in u by one
    let n = (degree + 2).div_ceil(2);
    let g = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (u, wu) in g.points.iter().zip(&g.weights) {
        for (v, wv) in g.points.iter().zip(&g.weights) {
            points.push([*u, (1.0 - u) * v]);
            weights.push(wu * wv * (1.0 - u));
        }
    }
    Rule { points, weights }
}
