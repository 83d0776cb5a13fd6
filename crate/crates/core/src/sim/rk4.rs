/// Classic fixed-step fourth-order Runge–Kutta with reusable buffers.
#[derive(Debug, Clone)]
pub struct Rk4 {
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Rk4 {
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `y` from `t` to `t + h`, given `k1 = f(t, y)` already evaluated.
    pub fn step_with_k1<F>(&mut self, mut f: F, t: f64, y: &mut [f64], h: f64, k1: &[f64])
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let half = 0.5 * h;
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * k1[i];
        }
        f(t + half, &self.tmp, &mut self.k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + half * self.k2[i];
        }
        f(t + half, &self.tmp, &mut self.k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        f(t + h, &self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for i in 0..y.len() {
            y[i] += sixth * (k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
    }

    pub fn step<F>(&mut self, mut f: F, t: f64, y: &mut [f64], h: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let mut k1 = vec![0.0; y.len()];
        f(t, y, &mut k1);
        self.step_with_k1(f, t, y, h, &k1);
    }
}

/// Integrates `y' = f(t, y)` from `t0` over `steps` steps of size `h`.
pub fn integrate_fixed<F>(mut f: F, t0: f64, y0: &[f64], h: f64, steps: usize) -> Vec<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut y = y0.to_vec();
    let mut rk = Rk4::new(y.len());
    for k in 0..steps {
        rk.step(&mut f, t0 + k as f64 * h, &mut y, h);
    }
    y
}
