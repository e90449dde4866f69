use dispcorr::analysis::{matched_filter_against, DopplerSweep};
use dispcorr::doppler::{
    alpha_from_velocity, resample_fft_pq, resample_lfm_analytic_baseband, resample_sinc_exact,
    Execution, ResampleMethod, ResampleStrategy,
};
use dispcorr::LfmParams;

fn sweep() -> DopplerSweep {
    DopplerSweep {
        params: LfmParams::new(411e6, 18e6, 500e-6).unwrap(),
        sample_rate: 200e6,
        carrier_frequency: 420e6,
        lut_density: 100,
    }
}

fn sinc(execution: Execution, window: usize) -> ResampleStrategy {
    ResampleStrategy::new(ResampleMethod::SincWindowed, execution, window).unwrap()
}

#[test]
fn windowed_sinc_beats_linear_interpolation() {
    let sw = sweep();
    let velocities: Vec<f64> = (1..=10).map(|k| k as f64 * 500.0).collect();
    let rows = sw
        .run(
            &velocities,
            &[sinc(Execution::ParallelLut, 25), ResampleStrategy::simple(ResampleMethod::Linear)],
        )
        .unwrap();
    for pair in rows.chunks(2) {
        assert!(
            pair[0].loss_db < pair[1].loss_db,
            "v = {}: sinc {} dB, linear {} dB",
            pair[0].velocity_mps,
            pair[0].loss_db,
            pair[1].loss_db
        );
    }
}

#[test]
fn loss_does_not_grow_with_window() {
    let sw = sweep();
    let windows = [5, 11, 25, 51, 101];
    let strategies: Vec<_> = windows.iter().map(|&w| sinc(Execution::ParallelNaive, w)).collect();
    let rows = sw.run(&[3700.0], &strategies).unwrap();
    // Short windows can overshoot unity gain, so the error is |loss|.
    let losses: Vec<f64> = rows.iter().map(|r| r.loss_db.abs()).collect();
    for (w, pair) in windows.windows(2).zip(losses.windows(2)) {
        assert!(pair[1] <= pair[0], "window {} -> {}: {:?}", w[0], w[1], losses);
    }
}

#[test]
fn exact_sinc_and_fft_pq_match_the_dilation_oracle() {
    let sw = sweep();
    let p = sw.params;
    let (fs, carrier) = (sw.sample_rate, sw.carrier_frequency);
    let lfm = sw.pristine().unwrap();
    let loss_vs_truth = |alpha: f64, out: &dispcorr::SampledSignal| {
        let truth = resample_lfm_analytic_baseband(&p, alpha, fs, carrier).unwrap();
        matched_filter_against(out, &truth, truth.energy()).unwrap().snr_loss_db
    };

    let alpha = alpha_from_velocity(3000.0).unwrap();
    let exact = resample_sinc_exact(&lfm, alpha, Execution::ParallelNaive).unwrap();
    let loss = loss_vs_truth(alpha, &exact);
    assert!(loss.abs() < 1e-3, "sinc_exact at 3 km/s: {loss} dB");

    // At a 2-sample point FFT P/Q is exact and agrees with the exact sinc.
    let v = sw.fft_pq_velocity(2).unwrap();
    let alpha = alpha_from_velocity(v).unwrap();
    let pq = resample_fft_pq(&lfm, alpha, false, 0.0).unwrap();
    let exact = resample_sinc_exact(&lfm, alpha, Execution::ParallelNaive).unwrap();
    let (a, b) = (loss_vs_truth(alpha, &pq), loss_vs_truth(alpha, &exact));
    assert!((a - b).abs() < 1e-3, "fft_pq {a} dB, sinc_exact {b} dB");
}

#[test]
fn sweeps_are_reproducible() {
    let sw = sweep();
    let velocities = [0.0, 1234.5, -2500.0, 4999.0];
    let strategies = [
        sinc(Execution::ParallelLutTiled, 25),
        ResampleStrategy::simple(ResampleMethod::FftPqWithTone),
        ResampleStrategy::simple(ResampleMethod::FrequencyConversion),
    ];
    let a = sw.run(&velocities, &strategies).unwrap();
    let b = sw.run(&velocities, &strategies).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), velocities.len() * strategies.len());
    assert_eq!(a[3].velocity_mps, 1234.5);
    assert_eq!(a[3].method, ResampleMethod::SincWindowed);
}
