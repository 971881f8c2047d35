//! FFT helpers for periodic axes: spectral derivatives and inversion of
//! constant-coefficient first-order operators.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

use super::{AxisName, Field};
use crate::error::{domain, Result};

/// Angular wavenumbers in FFT order for `n` points over `length`.
pub fn wavenumbers(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            TAU * m / length
        })
        .collect()
}

/// `d^order/dx^order` of one periodic line. The Nyquist mode is dropped
/// for odd orders.
pub fn derivative_line(values: &[Complex64], length: f64, order: u32) -> Vec<Complex64> {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = values.to_vec();
    fwd.process(&mut buf);
    let ks = wavenumbers(n, length);
    for (j, (v, k)) in buf.iter_mut().zip(&ks).enumerate() {
        if order % 2 == 1 && n.is_multiple_of(2) && j == n / 2 {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= Complex64::new(0.0, *k).powu(order);
        }
    }
    inv.process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter().map(|v| v * s).collect()
}

/// Spectral derivative of a complex field along a periodic axis.
pub fn partial_spectral(f: &Field<Complex64>, axis: AxisName, order: u32) -> Result<Field<Complex64>> {
    let grid = f.grid();
    let d = grid.axis_index(axis)?;
    let ax = &grid.axes()[d];
    if !ax.periodic {
        return domain(format!("spectral derivative needs periodic axis, {axis} is not"));
    }
    let (n, stride, length) = (ax.n, grid.stride(d), ax.length());
    let mut out = f.data().to_vec();
    for base in (0..out.len()).filter(|i| (i / stride) % n == 0) {
        let line: Vec<Complex64> = (0..n).map(|i| out[base + i * stride]).collect();
        for (i, v) in derivative_line(&line, length, order).into_iter().enumerate() {
            out[base + i * stride] = v;
        }
    }
    Field::new(grid.clone(), out)
}

/// Solve `cx·u_x + cy·u_y = rhs` on a doubly periodic (x, y) grid by symbol
/// division, with the mean of `u` set to zero. A mode where the symbol
/// vanishes but the forcing does not is a domain error.
pub fn invert_first_order(rhs: &Field<Complex64>, cx: Complex64, cy: Complex64) -> Result<Field<Complex64>> {
    let grid = rhs.grid();
    let dx = grid.axis_index(AxisName::X)?;
    let dy = grid.axis_index(AxisName::Y)?;
    let (ax, ay) = (&grid.axes()[dx], &grid.axes()[dy]);
    if !ax.periodic || !ay.periodic {
        return domain("first-order inversion needs periodic x and y axes");
    }
    let (nx, ny) = (ax.n, ay.n);
    let (sx, sy) = (grid.stride(dx), grid.stride(dy));
    let kx = wavenumbers(nx, ax.length());
    let ky = wavenumbers(ny, ay.length());
    let mut planner = FftPlanner::new();
    let (fx, ix) = (planner.plan_fft_forward(nx), planner.plan_fft_inverse(nx));
    let (fy, iy) = (planner.plan_fft_forward(ny), planner.plan_fft_inverse(ny));
    let mut out = rhs.data().to_vec();
    let forcing_scale = rhs.max_norm().max(f64::MIN_POSITIVE);
    let sym_scale = (cx.norm() * kx.iter().fold(0.0f64, |m, k| m.max(k.abs())))
        .max(cy.norm() * ky.iter().fold(0.0f64, |m, k| m.max(k.abs())));
    let bases: Vec<usize> = (0..out.len()).filter(|i| (i / sx) % nx == 0 && (i / sy) % ny == 0).collect();
    for base in bases {
        let mut plane = vec![Complex64::new(0.0, 0.0); nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                plane[i + nx * j] = out[base + i * sx + j * sy];
            }
        }
        for row in plane.chunks_mut(nx) {
            fx.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = plane[i + nx * j];
            }
            fy.process(&mut col);
            for j in 0..ny {
                plane[i + nx * j] = col[j];
            }
        }
        let norm = (nx * ny) as f64;
        for j in 0..ny {
            for i in 0..nx {
                let v = &mut plane[i + nx * j];
                if i == 0 && j == 0 {
                    *v = Complex64::new(0.0, 0.0);
                    continue;
                }
                let sym = Complex64::i() * (cx * kx[i] + cy * ky[j]);
                if sym.norm() <= 1e-12 * sym_scale.max(1.0) {
                    if v.norm() / norm > 1e-10 * forcing_scale {
                        let mx = if i <= nx / 2 { i as i64 } else { i as i64 - nx as i64 };
                        let my = if j <= ny / 2 { j as i64 } else { j as i64 - ny as i64 };
                        return domain(format!("resonant Fourier mode (kx={mx}, ky={my}) in first-order inversion"));
                    }
                    *v = Complex64::new(0.0, 0.0);
                } else {
                    *v /= sym;
                }
            }
        }
        for i in 0..nx {
            for j in 0..ny {
                col[j] = plane[i + nx * j];
            }
            iy.process(&mut col);
            for j in 0..ny {
                plane[i + nx * j] = col[j];
            }
        }
        for row in plane.chunks_mut(nx) {
            ix.process(row);
        }
        for j in 0..ny {
            for i in 0..nx {
                out[base + i * sx + j * sy] = plane[i + nx * j] / norm;
            }
        }
    }
    Field::new(grid.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Axis, GridSpec};

    fn torus(nx: usize, ny: usize) -> GridSpec {
        GridSpec::new(vec![
            Axis::periodic(AxisName::X, nx, 0.0, TAU),
            Axis::periodic(AxisName::Y, ny, 0.0, TAU),
        ])
        .unwrap()
    }

    #[test]
    fn spectral_derivative_of_trig() {
        let g = torus(16, 8);
        let f = Field::from_fn(&g, |c| Complex64::new((2.0 * c[0]).sin() * c[1].cos(), 0.0));
        let d = partial_spectral(&f, AxisName::X, 1).unwrap();
        let want = Field::from_fn(&g, |c| Complex64::new(2.0 * (2.0 * c[0]).cos() * c[1].cos(), 0.0));
        assert!((&d - &want).max_norm() < 1e-12);
        let d2 = partial_spectral(&f, AxisName::Y, 2).unwrap();
        assert!((&d2 + &f).max_norm() < 1e-12);
    }

    #[test]
    fn inversion_roundtrip() {
        let g = torus(16, 16);
        let u = Field::from_fn(&g, |c| Complex64::new((c[0] + 2.0 * c[1]).sin(), (3.0 * c[0]).cos()));
        let (cx, cy) = (Complex64::new(0.7, 0.0), Complex64::new(-1.3, 0.2));
        let ux = partial_spectral(&u, AxisName::X, 1).unwrap();
        let uy = partial_spectral(&u, AxisName::Y, 1).unwrap();
        let rhs = Field::new(g.clone(), ux.data().iter().zip(uy.data()).map(|(a, b)| cx * a + cy * b).collect()).unwrap();
        let back = invert_first_order(&rhs, cx, cy).unwrap();
        assert!((&back - &u).max_norm() < 1e-12);
    }

    #[test]
    fn resonant_mode_is_reported() {
        let g = torus(8, 8);
        // cx·kx + cy·ky vanishes on kx = ky
        let rhs = Field::from_fn(&g, |c| Complex64::new((c[0] + c[1]).cos(), 0.0));
        let err = invert_first_order(&rhs, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)).unwrap_err();
        assert!(err.to_string().contains("resonant"));
    }
}
