//! Central finite differences with one Richardson extrapolation step.

/// Central first difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_first(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second difference `(f(x+h) - 2f(x) + f(x-h)) / h^2`.
pub fn central_second(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Second derivative by central differences at `h` and `h/2` combined with
/// Richardson extrapolation, cancelling the `O(h^2)` term.
pub fn richardson_second(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    let coarse = central_second(&mut f, x, h);
    let fine = central_second(&mut f, x, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

/// First derivative by central differences with one Richardson step.
pub fn richardson_first(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    let coarse = central_first(&mut f, x, h);
    let fine = central_first(&mut f, x, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}
