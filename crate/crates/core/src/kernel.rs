//! Catalytic operators: 1-D cross-correlation (encode) and its exact linear
//! adjoint (decode), each followed by the `tanh(2x)` activation.
//!
//! Both operators share one banded matrix. For an encode from length `n` to
//! length `m` with kernel `w`, padding `p` and stride `s`:
//!
//! ```text
//! W[i, j] = w[j - i*s + p]   if 0 <= j - i*s + p < k, else 0
//! encode(x)[i] = act(sum_j W[i, j] x[j])
//! decode(y)[j] = act(sum_i W[i, j] y[i])
//! ```
//!
//! Padding is zero padding and the kernel is not flipped. There is no bias.

use serde::{Deserialize, Serialize};

use crate::error::ChemError;

/// Gain inside the activation `tanh(ACTIVATION_SCALE * x)`.
pub const ACTIVATION_SCALE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Encode,
    Decode,
}

/// Kernel size, padding and stride of one catalytic operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConvSpec {
    pub direction: Direction,
    pub kernel: usize,
    pub padding: usize,
    pub stride: usize,
}

impl ConvSpec {
    pub const fn encode(kernel: usize, padding: usize, stride: usize) -> Self {
        Self {
            direction: Direction::Encode,
            kernel,
            padding,
            stride,
        }
    }

    pub const fn decode(kernel: usize, padding: usize, stride: usize) -> Self {
        Self {
            direction: Direction::Decode,
            kernel,
            padding,
            stride,
        }
    }

    fn check(&self) -> Result<(), ChemError> {
        if self.kernel == 0 {
            return Err(ChemError::InvalidSpec("kernel size must be >= 1".into()));
        }
        if self.stride == 0 {
            return Err(ChemError::InvalidSpec("stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Output length for an input of length `len_in`, dispatching on direction.
    pub fn output_len(&self, len_in: usize) -> Result<usize, ChemError> {
        match self.direction {
            Direction::Encode => conv_output_length(len_in, self),
            Direction::Decode => deconv_output_length(len_in, self),
        }
    }
}

/// `floor((len_in + 2p - k) / s) + 1`.
pub fn conv_output_length(len_in: usize, spec: &ConvSpec) -> Result<usize, ChemError> {
    spec.check()?;
    if len_in == 0 {
        return Err(ChemError::InvalidSpec("input length must be >= 1".into()));
    }
    let padded = len_in + 2 * spec.padding;
    if padded < spec.kernel {
        return Err(ChemError::WindowTooLarge {
            len_in,
            kernel: spec.kernel,
            padding: spec.padding,
        });
    }
    Ok((padded - spec.kernel) / spec.stride + 1)
}

/// `(len_in - 1) * s - 2p + k`, the length whose encode has length `len_in`.
pub fn deconv_output_length(len_in: usize, spec: &ConvSpec) -> Result<usize, ChemError> {
    spec.check()?;
    if len_in == 0 {
        return Err(ChemError::InvalidSpec("input length must be >= 1".into()));
    }
    let len = (len_in as i64 - 1) * spec.stride as i64 - 2 * spec.padding as i64
        + spec.kernel as i64;
    if len < 1 {
        return Err(ChemError::NonPositiveLength(len));
    }
    Ok(len as usize)
}

#[inline]
pub fn activation(x: f64) -> f64 {
    (ACTIVATION_SCALE * x).tanh()
}

fn check_kernel(kernel: &[f64], spec: &ConvSpec) -> Result<(), ChemError> {
    if kernel.len() != spec.kernel {
        return Err(ChemError::LengthMismatch {
            what: "kernel",
            expected: spec.kernel,
            actual: kernel.len(),
        });
    }
    Ok(())
}

/// Pre-activation encode map. Direction in `spec` is ignored.
pub fn conv_linear(input: &[f64], kernel: &[f64], spec: &ConvSpec) -> Result<Vec<f64>, ChemError> {
    check_kernel(kernel, spec)?;
    let len_out = conv_output_length(input.len(), spec)?;
    let n = input.len() as isize;
    let mut out = vec![0.0; len_out];
    for (i, o) in out.iter_mut().enumerate() {
        let base = (i * spec.stride) as isize - spec.padding as isize;
        let mut acc = 0.0;
        for (t, w) in kernel.iter().enumerate() {
            let j = base + t as isize;
            if (0..n).contains(&j) {
                acc += w * input[j as usize];
            }
        }
        *o = acc;
    }
    Ok(out)
}

/// Pre-activation decode map: the transpose of [`conv_linear`] for the same
/// `(k, p, s)`. Direction in `spec` is ignored.
pub fn deconv_linear(
    input: &[f64],
    kernel: &[f64],
    spec: &ConvSpec,
) -> Result<Vec<f64>, ChemError> {
    check_kernel(kernel, spec)?;
    let len_out = deconv_output_length(input.len(), spec)?;
    let m = len_out as isize;
    let mut out = vec![0.0; len_out];
    for (i, y) in input.iter().enumerate() {
        let base = (i * spec.stride) as isize - spec.padding as isize;
        for (t, w) in kernel.iter().enumerate() {
            let j = base + t as isize;
            if (0..m).contains(&j) {
                out[j as usize] += w * y;
            }
        }
    }
    Ok(out)
}

pub fn apply_conv(input: &[f64], kernel: &[f64], spec: &ConvSpec) -> Result<Vec<f64>, ChemError> {
    let mut out = conv_linear(input, kernel, spec)?;
    out.iter_mut().for_each(|v| *v = activation(*v));
    Ok(out)
}

pub fn apply_deconv(
    input: &[f64],
    kernel: &[f64],
    spec: &ConvSpec,
) -> Result<Vec<f64>, ChemError> {
    let mut out = deconv_linear(input, kernel, spec)?;
    out.iter_mut().for_each(|v| *v = activation(*v));
    Ok(out)
}
