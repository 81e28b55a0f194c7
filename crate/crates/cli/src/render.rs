//! The pure part of each subcommand: flags in, bytes and a summary line out.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use clap::ValueEnum;
use resmidi_core::arp::ArpSession;
use resmidi_core::export::{events_to_json_lines, format_sig9, waveform_to_bin, waveform_to_csv};
use resmidi_core::lfo::{dominant_period, LfoSession, Pulse};
use resmidi_core::midi::{cc_events, lfo_to_cc_stream, notes_to_smf, events_to_smf};
use resmidi_core::reservoir::spectral_radius_estimate;
use resmidi_core::{Error, Network, NetworkConfig, NoteEvent, Scales};
use serde::Serialize;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or values; exit code 2.
    Usage(String),
    /// Could not write output; exit code 1.
    Io(String),
    /// The engine produced non-finite values; exit code 1.
    Engine(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) | Failure::Engine(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Engine(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Fault(_) => Failure::Engine(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfoFormat {
    Csv,
    Bin,
    Smf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArpFormat {
    Json,
    Csv,
    Smf,
}

#[derive(Debug, Clone)]
pub struct NetSpec {
    pub seed: u64,
    pub neurons: usize,
    pub density: f64,
    pub scales: Scales,
}

#[derive(Debug, Clone)]
pub struct LfoJob {
    pub net: NetSpec,
    pub steps: usize,
    pub format: LfoFormat,
    pub pulse_period: Option<u64>,
    pub pulse_amplitude: f64,
    pub controller: u8,
    pub channel: u8,
    pub steps_per_beat: u32,
}

#[derive(Debug, Clone)]
pub struct ArpJob {
    pub net: NetSpec,
    pub notes: Vec<i64>,
    pub steps: usize,
    pub beta: f64,
    pub rng_seed: u64,
    pub max_keys: usize,
    pub gate: f64,
    pub velocity: u8,
    pub format: ArpFormat,
    pub steps_per_beat: u32,
}

#[derive(Debug, Clone)]
pub struct InspectJob {
    pub net: NetSpec,
    pub arp: bool,
    pub max_keys: usize,
}

pub struct Rendered {
    pub bytes: Vec<u8>,
    pub summary: String,
}

fn steps_at_least_one(steps: usize) -> Result<(), Failure> {
    if steps == 0 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    Ok(())
}

pub fn lfo(job: &LfoJob) -> Result<Rendered, Failure> {
    steps_at_least_one(job.steps)?;
    let config = NetworkConfig {
        recurrent_density: job.net.density,
        ..NetworkConfig::lfo(job.net.neurons, job.net.seed)
    };
    let mut session = LfoSession::new(Network::new(config, job.net.scales)?)?.with_capture_len(0);
    if let Some(period) = job.pulse_period {
        session.set_pulse(Some(Pulse {
            period,
            amplitude: job.pulse_amplitude,
        }))?;
    }
    let mut samples = Vec::with_capacity(job.steps);
    for _ in 0..job.steps {
        samples.push(session.tick()?);
    }
    let values: Vec<f64> = samples.iter().map(|s| s.value).collect();

    let bytes = match job.format {
        LfoFormat::Csv => waveform_to_csv(&values).into_bytes(),
        LfoFormat::Bin => waveform_to_bin(&values),
        LfoFormat::Smf => {
            let messages = lfo_to_cc_stream(&samples, job.channel, job.controller)?;
            events_to_smf(&cc_events(&messages), job.steps_per_beat)?
        }
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let period = if values.len() >= 16 {
        dominant_period(&values)?
    } else {
        None
    };
    let summary = format!(
        "steps={} min={} max={} period={}",
        job.steps,
        format_sig9(min),
        format_sig9(max),
        period.map_or_else(|| "none".to_string(), |p| p.to_string())
    );
    Ok(Rendered { bytes, summary })
}

pub fn arp_events(job: &ArpJob) -> Result<Vec<NoteEvent>, Failure> {
    steps_at_least_one(job.steps)?;
    let config = NetworkConfig {
        recurrent_density: job.net.density,
        ..NetworkConfig::arp(job.net.neurons, job.max_keys, job.net.seed)
    };
    let mut session = ArpSession::new(Network::new(config, job.net.scales)?, job.rng_seed)?;
    session.set_held_notes(&job.notes)?;
    session.set_beta(job.beta)?;
    session.set_gate(job.gate)?;
    session.set_velocity(job.velocity)?;
    let mut events = Vec::new();
    for _ in 0..job.steps {
        if let Some(e) = session.tick()? {
            events.push(e);
        }
    }
    Ok(events)
}

pub fn arp(job: &ArpJob) -> Result<Rendered, Failure> {
    let events = arp_events(job)?;
    let bytes = match job.format {
        ArpFormat::Json => events_to_json_lines(&events).into_bytes(),
        ArpFormat::Csv => {
            let mut out = String::from("t,index,pitch,velocity,duration_steps\n");
            for e in &events {
                let _ = writeln!(out, "{},{},{},{},{}", e.t, e.index, e.pitch, e.velocity, e.duration_steps);
            }
            out.into_bytes()
        }
        ArpFormat::Smf => notes_to_smf(&events, job.steps_per_beat)?,
    };

    let mut counts: BTreeMap<u8, usize> = BTreeMap::new();
    for e in &events {
        *counts.entry(e.pitch).or_default() += 1;
    }
    // held notes that never sounded still get a zero
    for &p in &job.notes {
        counts.entry(p as u8).or_default();
    }
    let counts: Vec<String> = counts.iter().map(|(p, c)| format!("{p}:{c}")).collect();
    let summary = format!("steps={} events={} counts={}", job.steps, events.len(), counts.join(","));
    Ok(Rendered { bytes, summary })
}

#[derive(Serialize)]
struct Norms {
    w_in: f64,
    w: f64,
    w_fb: f64,
    w_out: f64,
    b: f64,
}

#[derive(Serialize)]
struct Report {
    mode: &'static str,
    seed: u64,
    neurons: usize,
    input_dim: usize,
    feedback_dim: usize,
    output_dim: usize,
    density: f64,
    nonzero_recurrent: usize,
    /// |lambda|max of the unscaled recurrent draw.
    base_spectral_radius: f64,
    target_spectral_radius: f64,
    /// |lambda|max of the effective recurrent matrix, measured.
    spectral_radius: f64,
    scales: Scales,
    /// Frobenius norms of the effective matrices.
    norms: Norms,
}

pub fn inspect(job: &InspectJob) -> Result<String, Failure> {
    let base = if job.arp {
        NetworkConfig::arp(job.net.neurons, job.max_keys, job.net.seed)
    } else {
        NetworkConfig::lfo(job.net.neurons, job.net.seed)
    };
    let config = NetworkConfig {
        recurrent_density: job.net.density,
        ..base
    };
    let net = Network::new(config.clone(), job.net.scales)?;
    let eff = net.effective();
    let report = Report {
        mode: if job.arp { "arp" } else { "lfo" },
        seed: config.seed,
        neurons: config.neurons,
        input_dim: config.input_dim,
        feedback_dim: config.feedback_dim,
        output_dim: config.output_dim,
        density: config.recurrent_density,
        nonzero_recurrent: net.base_w().iter().filter(|w| **w != 0.0).count(),
        base_spectral_radius: net.base_spectral_radius(),
        target_spectral_radius: job.net.scales.spectral_radius,
        spectral_radius: spectral_radius_estimate(&eff.w),
        scales: job.net.scales,
        norms: Norms {
            w_in: eff.w_in.norm(),
            w: eff.w.norm(),
            w_fb: eff.w_fb.norm(),
            w_out: eff.w_out.norm(),
            b: eff.b.norm(),
        },
    };
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}
