//! `resmidi`: render reservoir LFO waveforms and arpeggios to files, inspect
//! networks, or serve a live session over WebSocket.
//!
//! Exit codes: 0 success, 1 I/O or engine failure, 2 usage or validation error.

mod render;

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use resmidi_core::control::{Clock, Mode, ParamName, SessionConfig};
use resmidi_core::Scales;

use crate::render::{ArpFormat, ArpJob, Failure, InspectJob, LfoFormat, LfoJob, NetSpec, Rendered};

#[derive(Parser, Debug)]
#[command(name = "resmidi", version, about = "Fixed-weight echo state networks as MIDI LFOs and arpeggiators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render an LFO waveform (csv, bin or a CC-lane smf).
    LfoRender(LfoArgs),
    /// Render arpeggiator note events (json lines, csv or smf).
    ArpRender(ArpArgs),
    /// Print a JSON report of a network: sizes, spectral radius, matrix norms.
    Inspect(InspectArgs),
    /// Run the live-control WebSocket service.
    Serve(ServeArgs),
}

#[derive(Args, Debug, Clone)]
struct NetArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    neurons: usize,
    /// Fraction of nonzero recurrent weights, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Target largest |eigenvalue| of the recurrent matrix.
    #[arg(long)]
    spectral_radius: Option<f64>,
    #[arg(long)]
    leak_rate: Option<f64>,
    #[arg(long)]
    input_scale: Option<f64>,
    #[arg(long)]
    feedback_scale: Option<f64>,
    #[arg(long)]
    bias_scale: Option<f64>,
}

impl NetArgs {
    /// Overrides `defaults` with whichever scale flags were given.
    fn scales(&self, defaults: Scales) -> Result<Scales, Failure> {
        let mut s = defaults;
        let flags = [
            (ParamName::SpectralRadius, self.spectral_radius, &mut s.spectral_radius),
            (ParamName::LeakRate, self.leak_rate, &mut s.leak_rate),
            (ParamName::InputScale, self.input_scale, &mut s.input_scale),
            (ParamName::FeedbackScale, self.feedback_scale, &mut s.feedback_scale),
            (ParamName::BiasScale, self.bias_scale, &mut s.bias_scale),
        ];
        for (name, value, slot) in flags {
            if let Some(v) = value {
                name.check(v)?;
                *slot = v;
            }
        }
        Ok(s)
    }

    fn spec(&self, defaults: Scales) -> Result<NetSpec, Failure> {
        Ok(NetSpec {
            seed: self.seed,
            neurons: self.neurons,
            density: self.density,
            scales: self.scales(defaults)?,
        })
    }
}

#[derive(Args, Debug)]
struct LfoArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long, default_value_t = 1024)]
    steps: usize,
    /// Output file; standard output when omitted (the summary then goes to standard error).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LfoFormat::Csv)]
    format: LfoFormat,
    /// Feed a one-tick pulse every N ticks through the input weights (needs --input-scale > 0).
    #[arg(long)]
    pulse_period: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pulse_amplitude: f64,
    /// CC controller number for --format smf.
    #[arg(long, default_value_t = 1)]
    controller: u8,
    #[arg(long, default_value_t = 0)]
    channel: u8,
    /// Engine steps per quarter note in SMF output.
    #[arg(long, default_value_t = 4)]
    steps_per_beat: u32,
}

#[derive(Args, Debug)]
struct ArpArgs {
    #[command(flatten)]
    net: NetArgs,
    /// Held MIDI pitches, comma separated, e.g. 60,64,67.
    #[arg(long, default_value = "", hide_default_value = true)]
    notes: String,
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// Softmax confidence; 0 is uniform, large values approach argmax.
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Most keys that may be held at once (output rows of the network).
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_MAX_KEYS)]
    max_keys: usize,
    /// Fraction of a step each note sounds, in (0, 1].
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_GATE)]
    gate: f64,
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_VELOCITY)]
    velocity: u8,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ArpFormat::Json)]
    format: ArpFormat,
    #[arg(long, default_value_t = 4)]
    steps_per_beat: u32,
}

#[derive(Args, Debug)]
struct InspectArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long, value_enum, default_value_t = CliMode::Lfo)]
    mode: CliMode,
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_MAX_KEYS)]
    max_keys: usize,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[command(flatten)]
    net: NetArgs,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 7421)]
    port: u16,
    #[arg(long, value_enum, default_value_t = CliMode::Lfo)]
    mode: CliMode,
    /// `manual` ticks only on `step` messages.
    #[arg(long, value_enum, default_value_t = CliClock::Wall)]
    clock: CliClock,
    #[arg(long, default_value_t = resmidi_core::lfo::DEFAULT_TICK_RATE_HZ)]
    tick_rate: f64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_MAX_KEYS)]
    max_keys: usize,
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value_t = resmidi_core::arp::DEFAULT_GATE)]
    gate: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CliMode {
    Lfo,
    Arp,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CliClock {
    Wall,
    Manual,
}

fn parse_notes(text: &str) -> Result<Vec<i64>, Failure> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Failure::Usage(
            "--notes is empty; pass at least one MIDI pitch, e.g. --notes 60,64,67".into(),
        ));
    }
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Failure::Usage(format!("--notes: {p:?} is not a MIDI pitch number")))
        })
        .collect()
}

fn emit(rendered: Rendered, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, &rendered.bytes)
                .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
            println!("{}", rendered.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&rendered.bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Io(format!("cannot write to standard output: {e}")))?;
            eprintln!("{}", rendered.summary);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::LfoRender(a) => {
            let job = LfoJob {
                net: a.net.spec(Scales::lfo_default())?,
                steps: a.steps,
                format: a.format,
                pulse_period: a.pulse_period,
                pulse_amplitude: a.pulse_amplitude,
                controller: a.controller,
                channel: a.channel,
                steps_per_beat: a.steps_per_beat,
            };
            emit(render::lfo(&job)?, a.out.as_ref())
        }
        Command::ArpRender(a) => {
            ParamName::Beta.check(a.beta)?;
            ParamName::Gate.check(a.gate)?;
            let job = ArpJob {
                net: a.net.spec(Scales::arp_default())?,
                notes: parse_notes(&a.notes)?,
                steps: a.steps,
                beta: a.beta,
                rng_seed: a.rng_seed,
                max_keys: a.max_keys,
                gate: a.gate,
                velocity: a.velocity,
                format: a.format,
                steps_per_beat: a.steps_per_beat,
            };
            emit(render::arp(&job)?, a.out.as_ref())
        }
        Command::Inspect(a) => {
            let defaults = match a.mode {
                CliMode::Lfo => Scales::lfo_default(),
                CliMode::Arp => Scales::arp_default(),
            };
            let job = InspectJob {
                net: a.net.spec(defaults)?,
                arp: matches!(a.mode, CliMode::Arp),
                max_keys: a.max_keys,
            };
            println!("{}", render::inspect(&job)?);
            Ok(())
        }
        Command::Serve(a) => serve(a),
    }
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    ParamName::TickRateHz.check(a.tick_rate)?;
    ParamName::Beta.check(a.beta)?;
    ParamName::Gate.check(a.gate)?;
    let bind: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|_| Failure::Usage(format!("--host {:?} is not an IP address", a.host)))?;
    let session = SessionConfig {
        mode: match a.mode {
            CliMode::Lfo => Mode::Lfo,
            CliMode::Arp => Mode::Arp,
        },
        clock: match a.clock {
            CliClock::Wall => Clock::Wall,
            CliClock::Manual => Clock::Manual,
        },
        seed: a.net.seed,
        rng_seed: a.rng_seed,
        neurons: a.net.neurons,
        max_keys: a.max_keys,
        recurrent_density: a.net.density,
        lfo_scales: a.net.scales(Scales::lfo_default())?,
        tick_rate_hz: a.tick_rate,
        beta: a.beta,
        gate: a.gate,
        viz: true,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    runtime.block_on(async {
        let server = resmidi_service::Server::bind(resmidi_service::ServiceConfig { bind, session })
            .await
            .map_err(|e| match e {
                resmidi_service::Error::Session(e) => Failure::from(e),
                resmidi_service::Error::Io(e) => Failure::Io(format!("cannot bind {bind}: {e}")),
            })?;
        let addr = server.local_addr().map_err(|e| Failure::Io(e.to_string()))?;
        info!("serving on {addr}");
        eprintln!("listening on ws://{addr}/ws");
        server.run().await.map_err(|e| Failure::Io(e.to_string()))
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REMI_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            if let Failure::Usage(_) = f {
                eprintln!("run `resmidi --help` for usage");
            }
            ExitCode::from(f.exit_code())
        }
    }
}
