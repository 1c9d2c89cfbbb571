//! `region`: KNMD region of the `t = K2` memory point.

use hiercache::analytics::region_classify;
use hiercache::exact::qi;
use hiercache::HierConfig;

use crate::exit::CliResult;
use crate::output::NumFmt;
use crate::settings::Settings;

pub fn run(s: &Settings) -> CliResult<()> {
    let (k1, k2) = (s.require_usize("k1")?, s.require_usize("k2")?);
    let n = s.usize("n")?.unwrap_or(k1 * k2);
    let t = s.usize("t")?.unwrap_or(k2);
    let alpha = s.rational("alpha")?.unwrap_or_else(|| qi(0));
    let cfg = HierConfig::new(k1, k2, n, t, alpha)?;
    let r = region_classify(&cfg)?;
    let f = NumFmt::text(s.flag("rational")?);
    println!("config: {cfg}");
    println!("A = {}", f.num(&r.region_a));
    println!("B = {}", r.region_b.as_ref().map_or("unbounded".into(), |b| f.num(b)));
    println!("alpha threshold = {}", f.num(&r.alpha_threshold));
    println!("K1 > K2 forces Region II: {}", yes_no(r.forces_region_ii));
    println!("2 <= K1 <= K2 rules out Region III: {}", yes_no(r.excludes_region_iii));
    println!("{}", r.region);
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
