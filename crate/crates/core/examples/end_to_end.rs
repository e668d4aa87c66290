//! Generates a random instance, places it and legalizes the result.
//!
//! `cargo run --release -p macroplace --example end_to_end -- [seed] [rounds]`

use std::time::Instant;

use macroplace::io::{generate_instance, GenSpec};
use macroplace::netmodel::{is_legal, total_bb_netlength, total_overlap_area};
use macroplace::placer::Placer;
use macroplace::{naive_legalize, PlacerConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let rounds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(50_000);

    let file = generate_instance(&GenSpec { seed, ..Default::default() }).expect("generate");
    let inst = file.to_instance().expect("valid instance");
    let config = PlacerConfig { max_rounds: rounds, seed, ..Default::default() };

    let start = Instant::now();
    let placer = Placer::new(&inst.netlist, &inst.area, None, config).expect("placer");
    let initial = total_bb_netlength(&inst.netlist, placer.placement()).unwrap();
    let initial_overlap = total_overlap_area(placer.placement(), &inst.netlist).unwrap();
    let (placed, trace) = placer.run_with(|_| {}).expect("run");
    let elapsed = start.elapsed();

    let macro_area = inst.netlist.total_macro_area();
    let overlap = total_overlap_area(&placed, &inst.netlist).unwrap();
    println!("rounds            {}", trace.len());
    println!("time              {:.2?}", elapsed);
    println!("initial netlength {initial:.3} overlap {initial_overlap:.3}");
    println!("placed netlength  {:.3}", total_bb_netlength(&inst.netlist, &placed).unwrap());
    println!("overlap           {overlap:.4} ({:.3}% of macro area)", 100.0 * overlap / macro_area);
    match naive_legalize(&placed, &inst.netlist, &inst.area) {
        Ok(legal) => {
            assert!(is_legal(&legal, &inst.netlist, &inst.area).unwrap().is_legal());
            println!("legal netlength   {:.3}", total_bb_netlength(&inst.netlist, &legal).unwrap());
        }
        Err(e) => println!("legalization failed: {e}"),
    }
}
