use molspec::model::*;
use molspec::oracle::*;
use std::time::Instant;

fn main() {
    let mol = MoleculeSpec::with_modes(
        100.0, 1.0,
        vec![
            VibrationalMode::new(9.0, 0.05, 0.55),
            VibrationalMode::new(16.0, 0.055, 0.4),
            VibrationalMode::new(27.0, 0.06, 0.3),
        ],
    );
    for detuning in [0.0, 9.0, 16.0, 27.0] {
        let drive = DriveSpec::molecule(100.0 + detuning, 0.05);
        let layout = HilbertLayout::for_molecules(std::slice::from_ref(&mol), 5, None);
        let liouv = build_system(std::slice::from_ref(&mol), None, None, Some(&drive), &ThermalBath::zero(), &layout).unwrap();
        let t = Instant::now();
        let opts = SteadyOptions { method: SteadyMethod::Iterative, max_bicg_iters: 6000, ..Default::default() };
        match steady_state(&liouv, &opts) {
            Ok((rho, rep)) => {
                let pop = rho.expectation(&layout.excited_projector(0)).re;
                eprintln!("detuning {detuning:+.1}: {} iters={} res={:.2e} pop={:.6e} [{:?}]",
                    rep.method, rep.iterations, rep.residual, pop, t.elapsed());
            }
            Err(e) => eprintln!("detuning {detuning:+.1}: FAILED {e} [{:?}]", t.elapsed()),
        }
    }
}
