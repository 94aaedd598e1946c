//! Browser bindings for the interactive demo page in `www/`.

use elma::bench::{generate_low_rank, rse};
use elma::image::{add_noise, denoise_image, psnr, GrayImage, NssConfig};
use elma::penalty::emit_curves;
use elma::{add_awgn, solve_with_factors, svd, Method, RngState};
use wasm_bindgen::prelude::*;

fn js_err(e: elma::ElmaError) -> JsError {
    JsError::new(&e.to_string())
}

fn method(name: &str) -> Result<Method, JsError> {
    name.parse().map_err(js_err)
}

/// Samples of one penalty family, stored as four equal-length columns.
/// Undefined penalty or s-function values are NaN.
#[wasm_bindgen]
pub struct Curves {
    x: Vec<f64>,
    phi: Vec<f64>,
    s: Vec<f64>,
    theta: Vec<f64>,
}

#[wasm_bindgen]
impl Curves {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn phi(&self) -> Vec<f64> {
        self.phi.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn s(&self) -> Vec<f64> {
        self.s.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn theta(&self) -> Vec<f64> {
        self.theta.clone()
    }
}

#[wasm_bindgen]
pub fn threshold_curves(
    family: &str,
    lambda: f64,
    a_fraction: f64,
    p: f64,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Curves, JsError> {
    let spec = method(family)?.spec(lambda, a_fraction, p).map_err(js_err)?;
    let rows = emit_curves(&spec, lo, hi, step).map_err(js_err)?;
    Ok(Curves {
        x: rows.iter().map(|r| r.x).collect(),
        phi: rows.iter().map(|r| r.phi.unwrap_or(f64::NAN)).collect(),
        s: rows.iter().map(|r| r.s.unwrap_or(f64::NAN)).collect(),
        theta: rows.iter().map(|r| r.theta).collect(),
    })
}

/// One noisy low-rank matrix denoised by firm thresholding and by plain
/// singular value soft thresholding.
#[wasm_bindgen]
pub struct SpectrumDemo {
    sigma_in: Vec<f64>,
    sigma_firm: Vec<f64>,
    sigma_soft: Vec<f64>,
    rse_noisy: f64,
    rse_firm: f64,
    rse_soft: f64,
}

#[wasm_bindgen]
impl SpectrumDemo {
    #[wasm_bindgen(getter)]
    pub fn sigma_in(&self) -> Vec<f64> {
        self.sigma_in.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_firm(&self) -> Vec<f64> {
        self.sigma_firm.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_soft(&self) -> Vec<f64> {
        self.sigma_soft.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn rse_noisy(&self) -> f64 {
        self.rse_noisy
    }

    #[wasm_bindgen(getter)]
    pub fn rse_firm(&self) -> f64 {
        self.rse_firm
    }

    #[wasm_bindgen(getter)]
    pub fn rse_soft(&self) -> f64 {
        self.rse_soft
    }
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn spectrum_demo(
    m: usize,
    n: usize,
    rank: usize,
    sigma: f64,
    beta_firm: f64,
    beta_soft: f64,
    a_fraction: f64,
    seed: u64,
) -> Result<SpectrumDemo, JsError> {
    let mut rng = RngState::new(seed);
    let truth = generate_low_rank(m, n, rank, &mut rng).map_err(js_err)?;
    let noisy = add_awgn(&truth, sigma, &mut rng).map_err(js_err)?;
    let factors = svd(&noisy).map_err(js_err)?;
    let firm = solve_with_factors(&factors, &Method::Elma.spec(beta_firm * sigma, a_fraction, 0.0).map_err(js_err)?);
    let soft = solve_with_factors(&factors, &Method::Nnm.spec(beta_soft * sigma, 0.0, 0.0).map_err(js_err)?);
    Ok(SpectrumDemo {
        rse_noisy: rse(&noisy, &truth).map_err(js_err)?,
        rse_firm: rse(&firm.x_hat, &truth).map_err(js_err)?,
        rse_soft: rse(&soft.x_hat, &truth).map_err(js_err)?,
        sigma_in: firm.sigma_in,
        sigma_firm: firm.sigma_out,
        sigma_soft: soft.sigma_out,
    })
}

/// Noisy and denoised 8-bit pixels plus their PSNR against the input.
#[wasm_bindgen]
pub struct DenoiseDemo {
    noisy: Vec<u8>,
    denoised: Vec<u8>,
    psnr_noisy: f64,
    psnr_denoised: f64,
}

#[wasm_bindgen]
impl DenoiseDemo {
    #[wasm_bindgen(getter)]
    pub fn noisy(&self) -> Vec<u8> {
        self.noisy.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn denoised(&self) -> Vec<u8> {
        self.denoised.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn psnr_noisy(&self) -> f64 {
        self.psnr_noisy
    }

    #[wasm_bindgen(getter)]
    pub fn psnr_denoised(&self) -> f64 {
        self.psnr_denoised
    }
}

/// Adds noise to a grayscale image and denoises it with the default patch
/// settings. Pass `beta <= 0` for the method's default.
#[wasm_bindgen]
pub fn denoise_demo(
    pixels: &[u8],
    width: usize,
    height: usize,
    sigma: f64,
    method_name: &str,
    beta: f64,
    seed: u64,
) -> Result<DenoiseDemo, JsError> {
    let clean = GrayImage::from_u8(width, height, pixels).map_err(js_err)?;
    let noisy = add_noise(&clean, sigma, &mut RngState::new(seed)).map_err(js_err)?.quantized();
    let mut cfg = NssConfig::new(sigma, method(method_name)?);
    if beta > 0.0 {
        cfg.beta = beta;
    }
    let denoised = denoise_image(&noisy, &cfg).map_err(js_err)?.quantized();
    Ok(DenoiseDemo {
        psnr_noisy: psnr(&noisy, &clean).map_err(js_err)?,
        psnr_denoised: psnr(&denoised, &clean).map_err(js_err)?,
        noisy: noisy.to_u8(),
        denoised: denoised.to_u8(),
    })
}
