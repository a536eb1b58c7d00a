//! Writes the deterministic COMPAS-like table used by the real-data configs.
//!
//! Nine numeric features, a 0/1 sensitive attribute (1 = female) and a
//! binary two-year recidivism outcome. No real records are involved.
//!
//! ```text
//! cargo run --example compas_like_fixture -- crates/core/fixtures/compas_like.csv
//! ```

use fairmiss::math::sigmoid;
use fairmiss::RngStream;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};

const ROWS: usize = 6000;

fn poisson(rate: f64, rng: &mut impl Rng) -> f64 {
    if rate <= 0.0 {
        0.0
    } else {
        Poisson::new(rate).expect("positive rate").sample(rng)
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "crates/core/fixtures/compas_like.csv".into());
    let mut rng = RngStream::new(2013, 2014).rng();
    let noise = Normal::new(0.0, 1.0)?;
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "sex",
        "age",
        "priors_count",
        "juv_fel_count",
        "juv_misd_count",
        "juv_other_count",
        "c_charge_degree",
        "days_b_screening_arrest",
        "length_of_stay",
        "decile_score",
        "two_year_recid",
    ])?;
    for _ in 0..ROWS {
        let female = rng.random::<f64>() < 0.2;
        let a = f64::from(u8::from(female));
        let age = (18.0 + 4.0 * a + Exp::new(1.0f64 / 16.0)?.sample(&mut rng))
            .min(80.0)
            .floor();
        let young = (-(age - 18.0) / 12.0).exp();
        let priors = poisson(
            (0.9 - 0.02 * (age - 18.0) - 1.0 * a + 0.8 * noise.sample(&mut rng)).exp(),
            &mut rng,
        );
        let juv_fel = poisson(0.15 * young, &mut rng);
        let juv_misd = poisson(0.2 * young, &mut rng);
        let juv_other = poisson(0.25 * young, &mut rng);
        let felony = f64::from(u8::from(rng.random::<f64>() < 0.65));
        let days = (3.0 * noise.sample(&mut rng)).round().clamp(-30.0, 30.0);
        let stay = Exp::new(1.0f64 / (4.0 + 10.0 * felony))?
            .sample(&mut rng)
            .floor();
        let risk = -0.4 + 0.17 * priors - 0.045 * (1.0 - 0.8 * a) * (age - 35.0)
            + 0.35 * juv_fel
            + 0.2 * juv_misd
            + 0.25 * felony
            - 0.45 * a;
        let decile = (1.0 + 9.0 * sigmoid(risk + 0.6 * noise.sample(&mut rng)))
            .round()
            .clamp(1.0, 10.0);
        let recid = f64::from(u8::from(rng.random::<f64>() < sigmoid(risk)));
        w.write_record(
            [
                a, age, priors, juv_fel, juv_misd, juv_other, felony, days, stay, decile, recid,
            ]
            .iter()
            .map(|v| format!("{v}")),
        )?;
    }
    w.flush()?;
    println!("wrote {ROWS} rows to {path}");
    Ok(())
}
