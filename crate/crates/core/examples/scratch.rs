use nogp_core::scanner::*;
fn main() {
    let t = std::time::Instant::now();
    let cfg = ScanConfig::default();
    let rep = scan_report(&cfg).unwrap();
    println!("time {:?}", t.elapsed());
    for r in rep
        .records
        .iter()
        .filter(|r| r.e > 13.4 && r.e < 14.6 || r.zero_flag)
    {
        println!(
            "{} {:e} {:e} {:e} {} {} {}",
            r.e, r.delta, r.cyc_residual, r.gate_distance, r.g2_phase, r.zero_flag, r.status
        );
    }
    println!("{:?}", rep.flag_clusters());
    for z in &rep.zeros {
        println!(
            "{:.9} gate {:e} cyc {:e} flagged {:?} dips {:?}",
            z.bracket.root, z.record.gate_distance, z.record.cyc_residual, z.flagged, z.midpoints
        );
    }
}
