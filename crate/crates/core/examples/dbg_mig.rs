use num_complex::Complex64;
use realroots::bench::{gen_mignotte, oracle_roots};
use realroots::frobenius::{self, CompanionMatrix};
use realroots::linalg::{gaussian_vector, RngSeed};
use realroots::poly::Polynomial;
use realroots::radii::{all_root_radii, default_squarings};
use realroots::signiter::{build_y, sign_step, SignIterState};

fn main() {
    let p = gen_mignotte(32).unwrap();
    let n = 32;
    let r1 = all_root_radii(&p, default_squarings(n)).unwrap();
    let theta = r1.radii[0] * r1.relative_width;
    println!("theta = {theta}");
    let scaled = p
        .shift_scale(Complex64::new(theta, 0.0), Complex64::new(0.0, 0.0))
        .unwrap()
        .normalized_inf();
    let cp = CompanionMatrix::new(&scaled).unwrap();
    println!("scaled modulus norm {:.3e}, p0 {:.3e}", cp.modulus().norm_inf(), cp.modulus().coeff(0).norm());
    let nu = cp.determinantal_scale_factor().unwrap();
    println!("nu = {nu}");
    let mut state = SignIterState::new(frobenius::generator(&cp).scale(Complex64::new(nu, 0.0)));
    let roots: Vec<Complex64> = oracle_roots(&p)
        .unwrap()
        .iter()
        .filter(|z| z.im.abs() < 1e-7 * (1.0 + z.norm()))
        .map(|z| z / theta)
        .collect();
    println!("scaled real roots: {:?}", roots.iter().map(|z| z.re).collect::<Vec<_>>());
    for h in 1..=14 {
        match sign_step(&state) {
            Ok(s) => state = s,
            Err(e) => {
                println!("h={h}: step error {e}");
                let sigma = 0.3;
                state = realroots::signiter::stabilize_shift(&state, sigma);
                continue;
            }
        }
        let y = build_y(&state).unwrap();
        print!(
            "h={h:2} |y|={:.2e} |Y|={:.2e} realimg:",
            state.y.residue().norm_inf(),
            y.residue().norm_inf()
        );
        for z in &roots {
            print!(" {:.3e}", y.eigen_image(*z).norm());
        }
        // probe nonreal image magnitude: sample Y at a nonreal oracle root
        let all = oracle_roots(&p).unwrap();
        let some_nonreal = all.iter().find(|z| z.im.abs() > 0.1).unwrap() / theta;
        print!("  nonreal:{:.2e}", y.eigen_image(some_nonreal).norm());
        let g = gaussian_vector(n, RngSeed(1).derive(h));
        let yg = frobenius::apply_to_vector(&y, &g).unwrap();
        let yn: f64 = yg.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        println!("  probe={:.2e}", yn / (n as f64).sqrt());
    }
    let _ = Polynomial::one();
}
