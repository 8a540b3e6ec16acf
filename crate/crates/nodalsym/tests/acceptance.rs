//! End-to-end acceptance gate: eight criteria, one pass/fail line each.

use nalgebra::DMatrix;
use nodalsym::eigensolve::{self, cluster, EigenOptions};
use nodalsym::experiments::{self, SolveConfig, SweepConfig};
use nodalsym::fem;
use nodalsym::mesh;
use nodalsym::nodal::{self, RingVerdict, DEFAULT_ZERO_TOL};
use nodalsym::oracles;
use nodalsym::symmetry::{self, Verdict};
use std::time::Instant;

struct Gate {
    results: Vec<(String, bool)>,
}

impl Gate {
    fn new() -> Self {
        Gate { results: Vec::new() }
    }

    fn record(&mut self, criterion: usize, pass: bool, detail: String) {
        println!("criterion {criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.push((format!("criterion {criterion}: {detail}"), pass));
    }
}

#[test]
fn acceptance() {
    let mut gate = Gate::new();

    // criteria 1 & 2 share one fine disk solve
    let t0 = Instant::now();
    let table = experiments::run_disk_table(1.0, 0.02, 6, 1, None).expect("disk table");
    let elapsed = t0.elapsed();
    {
        let mu2 = table.rows[1].mu_fem;
        let mu6 = table.rows[5].mu_fem;
        let j11 = oracles::bessel_deriv_zero(1, 1).unwrap().powi(2);
        let j02 = oracles::bessel_deriv_zero(0, 2).unwrap().powi(2);
        let e2 = (mu2 - j11).abs() / j11;
        let e6 = (mu6 - j02).abs() / j02;
        let in_time = elapsed.as_secs() <= 120;
        gate.record(
            1,
            e2 <= 0.01 && e6 <= 0.015 && in_time,
            format!(
                "disk mu2 rel err {e2:.2e} (<=1%), mu6 rel err {e6:.2e} (<=1.5%), {:.1}s (<=120s)",
                elapsed.as_secs_f64()
            ),
        );
    }
    {
        let parities: Vec<Verdict> = table.rows[1..6].iter().map(|r| r.parity).collect();
        let counts: Vec<usize> = table.rows[1..6].iter().map(|r| r.nodal_count).collect();
        let want_parities =
            [Verdict::Odd, Verdict::Odd, Verdict::Even, Verdict::Even, Verdict::Even];
        let inner = table.rows[5].has_inner_domain;
        gate.record(
            2,
            parities == want_parities && counts == [2, 2, 4, 4, 2] && inner,
            format!(
                "parities {:?}, nodal counts {:?}, mu6 inner domain off boundary: {inner}",
                parities.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                counts
            ),
        );
    }

    // criterion 3: rectangles
    {
        let cfg = SolveConfig { h: 0.04, k: 4, tol: 1e-9, ..Default::default() };
        let rect = experiments::solve_domain(&experiments::builtin("rect21").unwrap(), &cfg)
            .expect("rect21 solve");
        let report =
            symmetry::principle_verdict(&rect.eigen, &rect.m, &rect.mesh, rect.rel_gap).unwrap();
        let exact = (std::f64::consts::PI / 4.0).powi(2);
        let err = (report.mu2 - exact).abs() / exact;
        let v2 = rect.mu2_vector().unwrap();
        let count = nodal::count_nodal_domains(&rect.mesh, &v2, DEFAULT_ZERO_TOL)
            .map(|r| r.domain_count)
            .unwrap_or(0);
        let rect_ok =
            err <= 0.01 && report.even_dim == 0 && report.odd_dim == 1 && count == 2;

        let cfg = SolveConfig { h: 0.05, k: 4, tol: 1e-9, ..Default::default() };
        let square = experiments::solve_domain(&experiments::builtin("square").unwrap(), &cfg)
            .expect("square solve");
        let sq = symmetry::principle_verdict(&square.eigen, &square.m, &square.mesh, square.rel_gap)
            .unwrap();
        let square_ok = sq.cluster.len() == 2 && sq.even_dim == 0 && sq.odd_dim == 2;
        gate.record(
            3,
            rect_ok && square_ok,
            format!(
                "rect21 mu2 rel err {err:.2e}, verdict odd={}, nodal count {count}; square cluster size {} split ({}, {})",
                report.antisymmetric, sq.cluster.len(), sq.even_dim, sq.odd_dim
            ),
        );
    }

    // criterion 4: Theorem 1 instances
    {
        let domains = vec![
            ("dumbbell".to_string(), experiments::builtin("dumbbell").unwrap()),
            ("annulus12".to_string(), experiments::builtin("annulus12").unwrap()),
        ];
        let census =
            experiments::run_principle_census(&domains, 0.05, 1e-8, 20177).expect("census");
        let holds = census.rows.iter().all(|r| r.holds);
        let ring = census.rows[1].ring;
        gate.record(
            4,
            holds && ring == RingVerdict::TransversalCut,
            format!("dumbbell/annulus verdicts HOLD: {holds}, annulus ring: {ring:?}"),
        );
    }

    // criterion 5: wheel counterexample sweep
    {
        let t0 = Instant::now();
        let report = experiments::run_epsilon_sweep(&SweepConfig::default());
        let elapsed = t0.elapsed();
        let in_time = elapsed.as_secs() <= 900;
        gate.record(
            5,
            report.eps_star.is_some() && report.passed() && in_time,
            format!(
                "eps* = {:?}, checks {} , {:.0}s (<=900s)",
                report.eps_star,
                report
                    .checks
                    .iter()
                    .map(|c| format!("{}:{}", c.name, c.pass))
                    .collect::<Vec<_>>()
                    .join(" "),
                elapsed.as_secs_f64()
            ),
        );
    }

    // criterion 6: Courant bound on the first 10 modes of every builtin
    {
        let mut all_ok = true;
        let mut worst = String::new();
        for name in experiments::BUILTIN_NAMES {
            let cfg = SolveConfig { h: 0.05, k: 10, tol: 1e-8, ..Default::default() };
            let solve =
                experiments::solve_domain(&experiments::builtin(name).unwrap(), &cfg)
                    .unwrap_or_else(|e| panic!("courant solve {name}: {e}"));
            let checks =
                nodal::courant_check(&solve.eigen, &solve.mesh, solve.rel_gap, DEFAULT_ZERO_TOL);
            for (idx, count, pass) in checks {
                if !pass {
                    all_ok = false;
                    worst = format!("{name} mode {idx} has {count} domains");
                }
            }
        }
        gate.record(
            6,
            all_ok,
            if all_ok { "no Courant violations on any builtin".into() } else { worst },
        );
    }

    // criterion 7: sparse vs dense oracle on small meshes
    {
        let cases = [
            ("disk", 0.25),
            ("rect21", 0.4),
            ("square", 0.3),
            ("annulus12", 0.5),
            ("dumbbell", 0.35),
        ];
        let mut all_ok = true;
        let mut detail = String::new();
        for (name, h) in cases {
            let spec = experiments::builtin(name).unwrap();
            let mesh = mesh::generate(&spec, h).expect("small mesh");
            let reduced = fem::assemble_reduced(&mesh).unwrap();
            let n = reduced.k.n();
            assert!(n <= 300, "{name} mesh has {n} DOF, want <= 300");
            let want = 5usize;
            let opts = EigenOptions { k: want, tol: 1e-11, ..Default::default() };
            let sparse = eigensolve::solve(&reduced.k, &reduced.m, &opts).expect("sparse solve");

            let kd = DMatrix::from_fn(n, n, |i, j| reduced.k.get(i, j));
            let md = DMatrix::from_fn(n, n, |i, j| reduced.m.get(i, j));
            let chol = md.clone().cholesky().expect("M SPD");
            let l = chol.l();
            let mut a = l.clone().solve_lower_triangular(&kd).unwrap();
            a.transpose_mut();
            let a = l.solve_lower_triangular(&a).unwrap();
            let a = (&a + a.transpose()) * 0.5;
            let eig = nalgebra::SymmetricEigen::new(a);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
            let dense_vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
            // dense eigenvectors back in x-coordinates: v = L^{-T} y
            let dense_vecs: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| {
                    let y = eig.eigenvectors.column(i).into_owned();
                    let v = l.transpose().solve_upper_triangular(&y).unwrap();
                    v.iter().copied().collect()
                })
                .collect();

            for i in 0..want {
                let rel =
                    (sparse.eigenvalues[i] - dense_vals[i]).abs() / (1.0 + dense_vals[i].abs());
                if rel > 1e-8 {
                    all_ok = false;
                    detail = format!("{name}: eigenvalue {i} off by {rel:.2e}");
                }
            }
            // angle after cluster alignment: residual of the M-projection of
            // each sparse vector onto the dense cluster span
            let m_ip = |x: &[f64], y: &[f64]| reduced.m.quadratic(x, y);
            let clusters = cluster(&sparse.eigenvalues, 1e-7 * (1.0 + dense_vals[want - 1]));
            for range in clusters {
                if range.start >= want {
                    break;
                }
                // M-orthonormalize the dense basis of this cluster
                let mut basis: Vec<Vec<f64>> = Vec::new();
                for j in range.clone() {
                    let mut v = dense_vecs[j].clone();
                    for b in &basis {
                        let c = m_ip(&v, b);
                        for (vi, bi) in v.iter_mut().zip(b) {
                            *vi -= c * bi;
                        }
                    }
                    let norm = m_ip(&v, &v).sqrt();
                    for vi in &mut v {
                        *vi /= norm;
                    }
                    basis.push(v);
                }
                for j in range {
                    if j >= want {
                        break;
                    }
                    let v = &sparse.vectors[j];
                    let norm2 = m_ip(v, v);
                    let proj2: f64 = basis.iter().map(|b| m_ip(v, b).powi(2)).sum();
                    let sin2 = (1.0 - proj2 / norm2).max(0.0);
                    let angle = sin2.sqrt().asin();
                    if angle > 1e-6 {
                        all_ok = false;
                        detail = format!("{name}: vector {j} angle {angle:.2e}");
                    }
                }
            }
        }
        gate.record(
            7,
            all_ok,
            if all_ok {
                "sparse matches dense oracle to 1e-8 (values) / 1e-6 (angles) on 5 domains".into()
            } else {
                detail
            },
        );
    }

    // criterion 8: exactness checks
    {
        let mut all_ok = true;
        let mut detail = String::new();
        for name in experiments::BUILTIN_NAMES {
            let spec = experiments::builtin(name).unwrap();
            let mesh = mesh::generate(&spec, 0.1).expect("mesh");
            let (k, m) = fem::assemble(&mesh).unwrap();
            let n = k.n();
            let ones = vec![1.0; n];
            let mut k1 = vec![0.0; n];
            k.matvec(&ones, &mut k1);
            let k1_max = k1.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            let mass: f64 = {
                let mut m1 = vec![0.0; n];
                m.matvec(&ones, &mut m1);
                m1.iter().sum()
            };
            // quadrature exactness: the assembled mass must equal the area
            // of the triangulated (polygonal) domain
            let area = mesh.area();
            let mass_rel = (mass - area).abs() / area;
            if k1_max > 1e-12 || mass_rel > 1e-10 {
                all_ok = false;
                detail = format!("{name}: K*1 {k1_max:.2e}, mass rel err {mass_rel:.2e}");
            }
            let sigma = mesh.pairing.as_ref().expect("builtins are symmetric");
            let mut sym_err = 0.0f64;
            for (i, j, v) in k.lower_entries() {
                sym_err = sym_err.max((k.get(sigma[i], sigma[j]) - v).abs());
            }
            for (i, j, v) in m.lower_entries() {
                sym_err = sym_err.max((m.get(sigma[i], sigma[j]) - v).abs());
            }
            if sym_err > 1e-12 {
                all_ok = false;
                detail = format!("{name}: P-conjugation error {sym_err:.2e}");
            }
        }
        gate.record(
            8,
            all_ok,
            if all_ok {
                "K*1 = 0, mass = |Omega|, P^T K P = K and P^T M P = M on all builtins".into()
            } else {
                detail
            },
        );
    }

    let failures: Vec<&String> =
        gate.results.iter().filter(|(_, p)| !p).map(|(s, _)| s).collect();
    assert!(failures.is_empty(), "failed acceptance criteria: {failures:#?}");
}
