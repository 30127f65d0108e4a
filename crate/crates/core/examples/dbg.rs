use elyfcr::milp::oracle::*;
use elyfcr::model::*;
fn main() {
    for st in [InitialState::Off, InitialState::On] {
        let mut inst = reference::instance(3, 2);
        inst.params.initial_state = st;
        inst.prices = reference::flat_prices(3, 30.0, 20.0, 25.0, 15.0);
        inst.contract.windows[0].min_delivery = 100.0;
        let t = std::time::Instant::now();
        let r = solve_oracle(&inst, DEFAULT_GRID_STEP).unwrap();
        println!(
            "{:?} {} {} {:?}",
            st,
            r.schedule.objective_value,
            r.evaluated,
            t.elapsed()
        );
    }
}
