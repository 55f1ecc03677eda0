use consat::blockworld::{build_index, clamp_literals, generate_instance, ground, Bounds};
use consat::cnf::{violation, Activations, DEFAULT_HARD_THRESHOLD};
use consat::consrnn::{build, forward, noisy_delta, apply_updates, RnnHyper, UpdateBatch};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() {
    let blocks: usize = std::env::var("B").ok().and_then(|v| v.parse().ok()).unwrap_or(3);
    let bounds = Bounds::for_blocks(blocks, 7).unwrap();
    let index = build_index(bounds).unwrap();
    let cnf = ground(bounds, 1000.0, 1.0).unwrap();
    let mut rng = StdRng::seed_from_u64(12);
    let inst = generate_instance(&mut rng, blocks, bounds).unwrap();
    let mut net = build(&cnf, &mut rng).unwrap();
    println!("vars={} conns={}", cnf.num_vars(), net.num_connections());
    let clamps = clamp_literals(&inst, &index);
    let hyper = RnnHyper::default();

    let mut input = Activations::with_clamps(net.num_vars(), &clamps);
    input.randomize_uniform(&mut rng);
    let mut output = forward(&net, &input);
    let mut batch = UpdateBatch::new(&net);
    let mut best = (usize::MAX, usize::MAX);
    let mut since = 0u64;
    let mut restarts = 0u32;
    for it in 0..10_000u64 {
        let v = violation(&cnf, &output, DEFAULT_HARD_THRESHOLD);
        let rank = (v.hard_violated, v.soft_violated);
        if rank < best {
            best = rank;
            since = 0;
        } else {
            since += 1;
        }
        if it % 500 == 0 {
            println!("it={it} hard={} soft={} best={:?} restarts={restarts}", v.hard_violated, v.soft_violated, best);
        }
        if v.hard_violated == 0 && v.soft_violated <= hyper.max_soft {
            println!("SOLVED at it={it}, restarts={restarts}");
            return;
        }
        let delta = noisy_delta(&cnf, &output, &hyper, &mut rng);
        batch.accumulate(&net, &delta, &input, hyper.learning_rate);
        if batch.len() >= hyper.mini_batch {
            apply_updates(&mut net, &mut batch);
        }
        if since >= hyper.no_improve {
            input.randomize_uniform(&mut rng);
            since = 0;
            restarts += 1;
        } else {
            for i in 0..net.num_vars() {
                if !input.is_clamped(i) {
                    let val = if rng.gen::<f64>() < hyper.noise_level {
                        rng.gen::<f64>()
                    } else {
                        output.value(i)
                    };
                    input.set(i, val);
                }
            }
        }
        output = forward(&net, &input);
    }
    println!("gave up, best={best:?}");
}
