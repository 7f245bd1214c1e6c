//! SNR gap versus target bit error rate for both modulation families.
//!
//! ```text
//! cargo run --example snr_gap
//! ```

use cralloc::model::{snr_gap, Modulation};

fn main() -> cralloc::Result<()> {
    println!("{:>8}  {:>10}  {:>10}  {:>10}  {:>10}", "BER", "MQAM", "MQAM dB", "MPSK", "MPSK dB");
    for exp in 1..=8 {
        let ber = 10f64.powi(-exp);
        let qam = snr_gap(Modulation::Mqam, ber)?;
        let psk = snr_gap(Modulation::Mpsk, ber)?;
        println!(
            "{ber:>8.0e}  {qam:>10.4}  {:>10.3}  {psk:>10.4}  {:>10.3}",
            10.0 * qam.log10(),
            10.0 * psk.log10()
        );
    }
    Ok(())
}
