//! One block of the control loop traced slot by slot.

use wncs::plant::{actuator_action, control_command, plant_step, predict_state};
use wncs::PlantParams;

pub fn run() -> wncs::Result<()> {
    let plant = PlantParams::uniform(1.3, 0.7, 0.0, 1.0)?;
    let n = 4;
    let x0 = 0.8;
    // command formed at t = 0 and decoded at t = n
    let command = control_command(x0, 0.0, false, n, &plant);
    let mut x = x0;
    for t in 0..n {
        x = plant_step(x, 0.0, 0.0, &plant);
        println!("t = {}: x = {x:.6}", t + 1);
    }
    println!("predicted {:.6}", predict_state(x0, 0.0, false, n, &plant));
    let u = actuator_action(command, true, true);
    x = plant_step(x, u, 0.0, &plant);
    println!("after actuation u = {u:.6}: x = {x:.3e}");
    Ok(())
}

fn main() -> wncs::Result<()> {
    run()
}
