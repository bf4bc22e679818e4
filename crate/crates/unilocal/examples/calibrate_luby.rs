//! Success rate of truncated Luby per iteration factor on sparse random graphs.

use unilocal::baselib::{luby_iterations, Luby};
use unilocal::config::Configuration;
use unilocal::graph::{generate, Family};
use unilocal::problems::Problem;
use unilocal::runtime::run_sync;

fn main() {
    let seeds = 200u64;
    for kappa in 1..=3u64 {
        for n in [32usize, 64, 128] {
            let p = 2.0 * (n as f64).ln() / n as f64;
            let mut ok = 0;
            for seed in 0..seeds {
                let c = Configuration::plain(generate(&Family::Gnp { n, p }, seed).unwrap());
                let prog = Luby { iterations: Some(luby_iterations(n as u64, kappa)) };
                let (y, _) = run_sync(&prog, &c, 10_000, seed).unwrap();
                ok += Problem::MIS.verify(&c, &y).unwrap() as u64;
            }
            println!("kappa {kappa} n {n}: {ok}/{seeds}");
        }
    }
}
