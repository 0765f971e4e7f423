use dayahead::synth::*;
use dayahead::curves::CurveMode;
use dayahead::stats::price_stats;

fn main() {
    let params = SynthParams::default();
    let records = generate_year(&params, CurveMode::Linear).unwrap();
    let shares = measure_shares(&records).unwrap();
    println!("market/load = {:.4}  res/load = {:.4}  res/market = {:.4}",
        shares.market_load, shares.res_load, shares.res_market);
    let prices: Vec<f64> = records.iter().map(|r| r.realized_price_eur_mwh).collect();
    let ps = price_stats(&prices).unwrap();
    println!("mean {:.2} std {:.2} min {:.2} max {:.2} negatives {}",
        ps.mean_eur_mwh, ps.std_eur_mwh, ps.min_eur_mwh, ps.max_eur_mwh, ps.negative_hour_count);
    let night_neg = records.iter().filter(|r| r.realized_price_eur_mwh < 0.0 && r.pv_mwh == 0.0).count();
    println!("night negatives {}", night_neg);
    let statuses: std::collections::HashMap<String, usize> = records.iter().fold(Default::default(), |mut m, r| {
        // recompute statuses via clear
        let c = dayahead::clearing::clear(&r.demand_curve, &r.supply_curve).unwrap();
        *m.entry(format!("{}", c.status)).or_default() += 1; m
    });
    println!("statuses: {:?}", statuses);
}
