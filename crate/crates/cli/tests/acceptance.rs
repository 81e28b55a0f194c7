//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantity and the wall time. Exits non-zero if any criterion fails.
//!
//! Runs as a plain binary (`harness = false`) so the lines always print.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use midly::{MetaMessage, MidiMessage, Smf, TrackEventKind};
use nalgebra::{DMatrix, DVector};
use resmidi_core::arp::ArpSession;
use resmidi_core::control::{replay, Clock, ControlMessage, LiveSession, Mode, SessionConfig, Telemetry};
use resmidi_core::lfo::{dominant_period, LfoSession, Pulse};
use resmidi_core::rng::Stream;
use resmidi_core::{render_lfo, Network, NetworkConfig, Scales};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------------------
// equation fidelity

/// Largest |eigenvalue| of a 2x2 matrix, closed form.
fn radius_2x2(w: [[f64; 2]; 2]) -> f64 {
    let tr = w[0][0] + w[1][1];
    let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        ((tr + r) / 2.0).abs().max(((tr - r) / 2.0).abs())
    } else {
        det.sqrt()
    }
}

fn equation_fidelity() -> Outcome {
    let w_in = [0.7, -0.4];
    let w = [[0.5, 0.2], [0.2, 0.3]];
    let w_fb = [0.6, -0.9];
    let w_out = [1.3, -0.8];
    let b = [0.1, -0.25];
    let (ks_in, rho, ks_fb, ks_b, alpha) = (0.8, 1.1, 1.5, 0.9, 0.35);
    let pulse = Pulse {
        period: 3,
        amplitude: 0.5,
    };

    let config = NetworkConfig::lfo(2, 0);
    let scales = Scales {
        input_scale: ks_in,
        spectral_radius: rho,
        feedback_scale: ks_fb,
        bias_scale: ks_b,
        leak_rate: alpha,
    };
    let net = Network::from_base(
        config,
        scales,
        DMatrix::from_column_slice(2, 1, &w_in),
        DMatrix::from_row_slice(2, 2, &[w[0][0], w[0][1], w[1][0], w[1][1]]),
        DMatrix::from_column_slice(2, 1, &w_fb),
        DMatrix::from_row_slice(1, 2, &w_out),
        DVector::from_column_slice(&b),
    )
    .map_err(|e| e.to_string())?;
    let mut session = LfoSession::new(net).map_err(|e| e.to_string())?;
    session.set_pulse(Some(pulse)).map_err(|e| e.to_string())?;

    // scalar oracle
    let g = rho / radius_2x2(w);
    let mut s = [0.0f64; 2];
    let mut y_prime = 0.5;
    let mut worst = 0.0f64;
    for t in 0..10u64 {
        let x = if t % pulse.period == 0 { pulse.amplitude } else { 0.0 };
        let mut h = [0.0; 2];
        for i in 0..2 {
            let pre = ks_in * w_in[i] * x
                + g * (w[i][0] * s[0] + w[i][1] * s[1])
                + ks_fb * w_fb[i] * y_prime
                + ks_b * b[i];
            h[i] = pre.tanh();
        }
        for i in 0..2 {
            s[i] = (1.0 - alpha) * s[i] + alpha * h[i];
        }
        let y = w_out[0] * s[0] + w_out[1] * s[1];
        y_prime = 1.0 / (1.0 + (-y).exp());

        let sample = session.tick().map_err(|e| e.to_string())?;
        let st = session.state();
        for i in 0..2 {
            worst = worst.max((st.h[i] - h[i]).abs()).max((st.s[i] - s[i]).abs());
        }
        worst = worst.max((sample.value - y_prime).abs());
    }
    ensure(worst < 1e-12, || format!("max abs error {worst:e} >= 1e-12"))?;
    Ok(format!("10 steps, max abs error {worst:.1e} (tol 1e-12)"))
}

// ---------------------------------------------------------------------------
// boundedness

fn boundedness() -> Outcome {
    let mut rng = Stream::new(2024, "acceptance-boundedness");
    let mut steps = 0u64;
    for config_index in 0..50 {
        let neurons = 1 + (rng.next_u64() % 64) as usize;
        let config = NetworkConfig {
            recurrent_density: 0.1 + 0.9 * rng.unit(),
            ..NetworkConfig::lfo(neurons, rng.next_u64())
        };
        let scales = Scales {
            input_scale: 3.0 * rng.unit(),
            spectral_radius: 3.0 * rng.unit(),
            feedback_scale: 5.0 * rng.unit(),
            bias_scale: 3.0 * rng.unit(),
            leak_rate: rng.unit(),
        };
        let net = Network::new(config, scales).map_err(|e| e.to_string())?;
        let mut session = LfoSession::new(net).map_err(|e| e.to_string())?.with_capture_len(0);
        session
            .set_pulse(Some(Pulse {
                period: 1 + rng.next_u64() % 50,
                amplitude: 10.0 * rng.symmetric(),
            }))
            .map_err(|e| e.to_string())?;
        for _ in 0..10_000 {
            let sample = session.tick().map_err(|e| e.to_string())?;
            let st = session.state();
            ensure(st.h.iter().all(|v| v.abs() <= 1.0), || {
                format!("config {config_index}: h out of [-1,1] at t={}", sample.t)
            })?;
            ensure(st.s.iter().all(|v| v.abs() <= 1.0), || {
                format!("config {config_index}: s out of [-1,1] at t={}", sample.t)
            })?;
            ensure(sample.value > 0.0 && sample.value < 1.0, || {
                format!("config {config_index}: value {} outside (0,1)", sample.value)
            })?;
            steps += 1;
        }
    }
    Ok(format!("50 configs x 10000 steps = {steps} steps, all h,s in [-1,1], all values in (0,1)"))
}

// ---------------------------------------------------------------------------
// contraction

fn contraction() -> Outcome {
    let mut worst_steps = 0;
    for seed in 0..20u64 {
        let scales = Scales {
            spectral_radius: 0.9,
            leak_rate: 1.0,
            ..Scales::ZERO
        };
        let net = Network::new(NetworkConfig::lfo(100, seed), scales).map_err(|e| e.to_string())?;
        let mut rng = Stream::new(seed, "acceptance-contraction");
        let mut a = resmidi_core::ReservoirState::from_state(&(0..100).map(|_| rng.symmetric()).collect::<Vec<_>>());
        let mut b = resmidi_core::ReservoirState::from_state(&(0..100).map(|_| rng.symmetric()).collect::<Vec<_>>());
        let mut y = [0.0];
        let mut converged = None;
        for step in 1..=500 {
            net.step_in_place(&mut a, &[0.0], &[0.5], &mut y).map_err(|e| e.to_string())?;
            net.step_in_place(&mut b, &[0.0], &[0.5], &mut y).map_err(|e| e.to_string())?;
            let gap = a.s.iter().zip(b.s.iter()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            if gap < 1e-6 {
                converged = Some(step);
                break;
            }
        }
        let step = converged.ok_or_else(|| format!("seed {seed}: states still apart after 500 steps"))?;
        worst_steps = worst_steps.max(step);
    }
    Ok(format!("20 seeds, N=100: |ds|inf < 1e-6 within {worst_steps} steps (limit 500)"))
}

// ---------------------------------------------------------------------------
// spectral radius control

fn eigen_radius(w: &DMatrix<f64>) -> f64 {
    w.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max)
}

fn spectral_radius_control() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for &n in &[10usize, 100, 300] {
        for seed in 0..3u64 {
            for &(density, target) in &[(1.0, 0.9), (0.2, 1.25)] {
                let config = NetworkConfig {
                    recurrent_density: density,
                    ..NetworkConfig::lfo(n, seed)
                };
                let scales = Scales {
                    spectral_radius: target,
                    ..Scales::lfo_default()
                };
                let net = Network::new(config, scales).map_err(|e| e.to_string())?;
                let achieved = eigen_radius(&net.effective().w);
                let rel = (achieved - target).abs() / target;
                worst = worst.max(rel);
                checked += 1;
                ensure(rel < 0.01, || {
                    format!("N={n} seed={seed} density={density}: |lambda|max {achieved} vs target {target}")
                })?;
            }
        }
    }
    Ok(format!("{checked} networks (N in 10,100,300), worst relative error {:.3}% (tol 1%)", worst * 100.0))
}

// ---------------------------------------------------------------------------
// arpeggiator statistics

fn arp_statistics() -> Outcome {
    // confidence 0: uniform over the held notes
    let mut session = ArpSession::with_defaults(30, 8, 7, 11).map_err(|e| e.to_string())?;
    session.set_held_notes(&[60, 64, 67, 72]).map_err(|e| e.to_string())?;
    session.set_beta(0.0).map_err(|e| e.to_string())?;
    let mut counts = [0usize; 4];
    for _ in 0..40_000 {
        let e = session.tick().map_err(|e| e.to_string())?.ok_or("no event")?;
        counts[e.index] += 1;
    }
    ensure(counts.iter().all(|c| (9600..=10400).contains(c)), || {
        format!("beta=0 counts {counts:?} outside 10000 +/- 4%")
    })?;

    // pinned logits against the closed-form softmax
    let mut session = ArpSession::with_defaults(4, 3, 1, 99).map_err(|e| e.to_string())?;
    session.set_held_notes(&[60, 62, 64]).map_err(|e| e.to_string())?;
    session.set_beta(1.0).map_err(|e| e.to_string())?;
    let logits = [1.0, 0.0, -1.0];
    let z: f64 = logits.iter().map(|v: &f64| v.exp()).sum();
    let expected: Vec<f64> = logits.iter().map(|v| v.exp() / z).collect();
    let mut bins = [0usize; 3];
    for _ in 0..100_000 {
        bins[session.choose_from_logits(&logits).map_err(|e| e.to_string())?] += 1;
    }
    let mut worst_bin = 0.0f64;
    for i in 0..3 {
        worst_bin = worst_bin.max((bins[i] as f64 / 100_000.0 - expected[i]).abs());
    }
    ensure(worst_bin <= 0.005, || format!("pinned softmax bins {bins:?} off by {worst_bin}"))?;

    // near-infinite confidence: always the argmax of the readout
    let mut session = ArpSession::with_defaults(40, 8, 3, 5).map_err(|e| e.to_string())?;
    session.set_held_notes(&[60, 63, 67, 70]).map_err(|e| e.to_string())?;
    session.set_beta(1e6).map_err(|e| e.to_string())?;
    let mut agree = 0;
    let mut unique = 0;
    for _ in 0..1000 {
        let e = session.tick().map_err(|e| e.to_string())?.ok_or("no event")?;
        let y = &session.last_output()[..4];
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if y.iter().filter(|v| **v == max).count() != 1 {
            continue;
        }
        unique += 1;
        let argmax = y.iter().position(|v| *v == max).unwrap();
        if argmax == e.index {
            agree += 1;
        }
    }
    ensure(unique > 0 && agree == unique, || format!("beta=1e6 argmax agreement {agree}/{unique}"))?;
    Ok(format!(
        "beta=0 counts {counts:?}; pinned softmax max bin error {worst_bin:.4} (tol 0.005); beta=1e6 argmax {agree}/{unique}"
    ))
}

// ---------------------------------------------------------------------------
// determinism and SMF validity (through the real binary)

fn resmidi(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_resmidi"))
        .args(args)
        .env_remove("REMI_LOG")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn render_commands() -> Vec<Vec<&'static str>> {
    vec![
        vec!["lfo-render", "--steps", "2048", "--format", "csv"],
        vec!["lfo-render", "--steps", "2048", "--format", "bin", "--seed", "9", "--leak-rate", "0.5"],
        vec!["lfo-render", "--steps", "1000", "--format", "smf", "--pulse-period", "16", "--input-scale", "0.5"],
        vec!["arp-render", "--notes", "60,64,67,71", "--steps", "500", "--format", "json"],
        vec!["arp-render", "--notes", "48,55,60", "--steps", "500", "--format", "csv", "--beta", "0.5"],
        vec!["arp-render", "--notes", "60,62,64,65,67", "--steps", "500", "--format", "smf", "--rng-seed", "3"],
        vec!["inspect", "--neurons", "50", "--seed", "4"],
    ]
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (i, args) in render_commands().into_iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{i}-{run}"));
            let path_s = path.to_str().unwrap().to_string();
            if args[0] == "inspect" {
                let out = Command::new(env!("CARGO_BIN_EXE_resmidi"))
                    .args(&args)
                    .output()
                    .map_err(|e| e.to_string())?;
                outputs.push(out.stdout);
            } else {
                let mut full = args.clone();
                full.extend(["--out", path_s.as_str()]);
                resmidi(&full)?;
                outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
            }
        }
        ensure(!outputs[0].is_empty() && outputs[0] == outputs[1], || {
            format!("{args:?}: outputs differ between runs")
        })?;
        files += 1;
    }
    Ok(format!("{files} commands (csv, bin, smf, json lines, inspect) byte-identical across two runs"))
}

/// (tick, on?, channel, key, velocity) for every channel message, sorted.
type Multiset = Vec<(u64, bool, u8, u8, u8)>;

fn parsed_multiset(bytes: &[u8]) -> Result<Multiset, String> {
    let smf = Smf::parse(bytes).map_err(|e| e.to_string())?;
    ensure(smf.tracks.len() == 1, || format!("{} tracks", smf.tracks.len()))?;
    let track = &smf.tracks[0];
    ensure(
        matches!(track.last().map(|e| e.kind), Some(TrackEventKind::Meta(MetaMessage::EndOfTrack))),
        || "track does not end with end-of-track".into(),
    )?;
    let mut now = 0u64;
    let mut set = Vec::new();
    for e in track {
        now += u64::from(e.delta.as_int());
        if let TrackEventKind::Midi { channel, message } = e.kind {
            match message {
                MidiMessage::NoteOn { key, vel } if vel.as_int() > 0 => {
                    set.push((now, true, channel.as_int(), key.as_int(), vel.as_int()))
                }
                MidiMessage::NoteOn { key, .. } | MidiMessage::NoteOff { key, .. } => {
                    set.push((now, false, channel.as_int(), key.as_int(), 0))
                }
                other => return Err(format!("unexpected message {other:?}")),
            }
        }
    }
    set.sort();
    Ok(set)
}

/// What the file should contain, from the event list alone.
fn expected_multiset(events: &[resmidi_core::NoteEvent], spb: u64) -> Multiset {
    let mut notes: Vec<(u64, u64, u8, u8)> = events
        .iter()
        .map(|e| {
            let on = (e.t * 480 + spb / 2) / spb;
            let len = ((e.duration_steps * 480.0 / spb as f64).round() as u64).max(1);
            (on, on + len, e.pitch, e.velocity)
        })
        .collect();
    // a note is cut off when its pitch sounds again
    let mut last_of_pitch: BTreeMap<u8, usize> = BTreeMap::new();
    for i in 0..notes.len() {
        let (on, _, pitch, _) = notes[i];
        if let Some(&j) = last_of_pitch.get(&pitch) {
            notes[j].1 = notes[j].1.min(on);
        }
        last_of_pitch.insert(pitch, i);
    }
    let mut set: Multiset = notes
        .iter()
        .flat_map(|&(on, off, p, v)| [(on, true, 0, p, v), (off, false, 0, p, 0)])
        .collect();
    set.sort();
    set
}

fn smf_validity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cases: &[(&str, &str, &str, &str)] = &[
        // notes, beta, gate, steps per beat
        ("60", "2", "0.5", "4"),
        ("60,64,67,72", "0", "1", "4"),
        ("36,48,60,72,84,96", "5", "0.25", "3"),
        ("60,61", "0.1", "1", "7"),
        ("0,127", "1", "0.01", "480"),
    ];
    let mut notes_checked = 0;
    for (i, (notes, beta, gate, spb)) in cases.iter().enumerate() {
        let common = ["--notes", notes, "--beta", beta, "--gate", gate, "--steps", "300", "--neurons", "30"];
        let smf_path = dir.path().join(format!("{i}.mid"));
        let json_path = dir.path().join(format!("{i}.jsonl"));
        let mut smf_args = vec!["arp-render"];
        smf_args.extend(common);
        smf_args.extend(["--format", "smf", "--steps-per-beat", spb, "--out", smf_path.to_str().unwrap()]);
        resmidi(&smf_args)?;
        let mut json_args = vec!["arp-render"];
        json_args.extend(common);
        json_args.extend(["--format", "json", "--out", json_path.to_str().unwrap()]);
        resmidi(&json_args)?;

        let bytes = std::fs::read(&smf_path).map_err(|e| e.to_string())?;
        ensure(bytes[..14] == [0x4D, 0x54, 0x68, 0x64, 0, 0, 0, 6, 0, 0, 0, 1, 0x01, 0xE0], || {
            format!("case {i}: bad header {:02X?}", &bytes[..14])
        })?;
        let events = resmidi_core::export::events_from_json_lines(
            &std::fs::read_to_string(&json_path).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let parsed = parsed_multiset(&bytes).map_err(|e| format!("case {i}: {e}"))?;
        let expected = expected_multiset(&events, spb.parse().unwrap());
        ensure(parsed == expected, || {
            format!("case {i}: parsed {} messages, expected {}", parsed.len(), expected.len())
        })?;
        notes_checked += events.len();
    }
    Ok(format!(
        "{} arp-render SMF files ({notes_checked} notes) parsed by an independent reader with identical event multisets",
        cases.len()
    ))
}

// ---------------------------------------------------------------------------
// waveform search

const MIN_PERIOD: usize = 8;

fn waveform_search() -> Outcome {
    let mut rng = Stream::new(1, "acceptance-search");
    for attempt in 1..=200 {
        let seed = rng.next_u64() % 10_000;
        let scales = Scales {
            input_scale: 0.0,
            spectral_radius: 0.5 + 1.5 * rng.unit(),
            feedback_scale: 3.0 * rng.unit(),
            bias_scale: rng.unit(),
            leak_rate: 0.02 + 0.98 * rng.unit(),
        };
        let wave = render_lfo(&NetworkConfig::lfo(50, seed), scales, 2048).map_err(|e| e.to_string())?;
        let lo = wave.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = wave.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo <= 0.2 {
            continue;
        }
        // a flip-flop between two values is periodic but not an oscillator worth the name
        if let Some(period) = dominant_period(&wave).map_err(|e| e.to_string())?.filter(|p| *p >= MIN_PERIOD) {
            return Ok(format!(
                "found after {attempt} configs: seed={seed} rho={:.3} fb={:.3} bias={:.3} alpha={:.3}; peak-to-peak {:.3}, period {period}",
                scales.spectral_radius,
                scales.feedback_scale,
                scales.bias_scale,
                scales.leak_rate,
                hi - lo
            ));
        }
    }
    Err(format!("no non-constant waveform with period >= {MIN_PERIOD} in 200 configs"))
}

// ---------------------------------------------------------------------------
// protocol replay

fn fuzz_message(rng: &mut Stream) -> ControlMessage {
    const NAMES: [&str; 9] = [
        "input_scale",
        "spectral_radius",
        "feedback_scale",
        "bias_scale",
        "leak_rate",
        "beta",
        "tick_rate_hz",
        "gate",
        "volume",
    ];
    match rng.next_u64() % 10 {
        0..=3 => ControlMessage::SetParam {
            name: NAMES[(rng.next_u64() % NAMES.len() as u64) as usize].into(),
            // some values are out of range on purpose
            value: 3.0 * rng.symmetric() + 0.5,
        },
        4 => {
            let count = rng.next_u64() % 10;
            ControlMessage::SetHeldNotes {
                pitches: (0..count).map(|_| 40 + (rng.next_u64() % 50) as i64).collect(),
            }
        }
        5 => ControlMessage::ResetState,
        6 => ControlMessage::Reseed {
            seed: rng.next_u64() % 100,
            neurons: (rng.next_u64() % 40) as usize,
        },
        7 => ControlMessage::SetMode {
            mode: if rng.unit() < 0.5 { Mode::Lfo } else { Mode::Arp },
        },
        8 => ControlMessage::SnapshotRequest,
        _ => ControlMessage::Step {
            count: rng.next_u64() % 200,
        },
    }
}

fn protocol_replay() -> Outcome {
    let mut total_values = 0;
    let mut total_notes = 0;
    for fuzz_seed in 0..10u64 {
        let mut rng = Stream::new(fuzz_seed, "acceptance-fuzz");
        let mut session = LiveSession::new(SessionConfig {
            clock: Clock::Manual,
            seed: fuzz_seed,
            rng_seed: fuzz_seed + 1,
            neurons: 30,
            ..SessionConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let mut lfo = Vec::new();
        let mut arp = Vec::new();
        for _ in 0..300 {
            for frame in session.handle_message(&fuzz_message(&mut rng)) {
                match frame {
                    Telemetry::LfoFrame { t0, values } => {
                        lfo.extend(values.into_iter().enumerate().map(|(i, v)| (t0 + i as u64, v)))
                    }
                    e @ Telemetry::ArpEvent { .. } => arp.push(e),
                    _ => {}
                }
            }
        }
        let replayed = replay(session.log(), session.tick_count()).map_err(|e| e.to_string())?;
        let bits = |v: &[(u64, f64)]| v.iter().map(|(t, x)| (*t, x.to_bits())).collect::<Vec<_>>();
        ensure(bits(&replayed.lfo) == bits(&lfo), || {
            format!("fuzz seed {fuzz_seed}: replayed LFO values differ ({} vs {})", replayed.lfo.len(), lfo.len())
        })?;
        ensure(replayed.arp == arp, || format!("fuzz seed {fuzz_seed}: replayed note events differ"))?;
        total_values += lfo.len();
        total_notes += arp.len();
    }
    Ok(format!(
        "10 fuzzed sessions x 300 messages: {total_values} LFO values and {total_notes} notes reproduced bit-exactly"
    ))
}

fn main() {
    // `cargo test -- --list` and friends: nothing to enumerate
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria = [
        Criterion {
            name: "equation_fidelity",
            budget: Some(Duration::from_secs(1)),
            run: equation_fidelity,
        },
        Criterion {
            name: "boundedness",
            budget: Some(Duration::from_secs(10)),
            run: boundedness,
        },
        Criterion {
            name: "contraction",
            budget: Some(Duration::from_secs(5)),
            run: contraction,
        },
        Criterion {
            name: "spectral_radius_control",
            budget: Some(Duration::from_secs(30)),
            run: spectral_radius_control,
        },
        Criterion {
            name: "arp_statistics",
            budget: Some(Duration::from_secs(30)),
            run: arp_statistics,
        },
        Criterion {
            name: "determinism",
            budget: None,
            run: determinism,
        },
        Criterion {
            name: "smf_validity",
            budget: None,
            run: smf_validity,
        },
        Criterion {
            name: "waveform_search",
            budget: Some(Duration::from_secs(60)),
            run: waveform_search,
        },
        Criterion {
            name: "protocol_replay",
            budget: None,
            run: protocol_replay,
        },
    ];

    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("took {:.2} s, budget {} s", elapsed.as_secs_f64(), budget.as_secs()));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {:<24} {detail} [{:.2} s]", c.name, elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:<24} {detail} [{:.2} s]", c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
