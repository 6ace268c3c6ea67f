//! TCP service: one simulation task owns the world; connection tasks feed it
//! commands through a single queue and receive replies and broadcasts.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use avatar_core::protocol::{encode, ChannelModel, FrameBuffer, ImpairedChannel, Message, OperatorCommand, RobotEvent};
use avatar_core::robot::RobotKind;
use avatar_core::scenario::default_parties;
use avatar_core::session::{assign_shifts, DaySchedule, Roster, SessionPlan};
use avatar_core::world::{ConnId, FloorPlan, Recipient, WorldConfig, WorldError, WorldState, DEFAULT_TICK_MS};
use clap::Args;
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver, UnboundedSender};
use tokio::time::Instant;

use crate::{parse_channel, CliError};

/// World-view frames per wall-clock second.
const FRAME_HZ: u64 = 5;

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Floor-plan JSON; the reference plan when omitted.
    #[arg(long)]
    pub floorplan: Option<PathBuf>,
    /// Pilot roster JSON; the reference roster when omitted.
    #[arg(long)]
    pub roster: Option<PathBuf>,
    #[arg(long, env = "AVATAR_CAFE_PORT", default_value_t = 7878)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Simulated seconds per wall-clock second.
    #[arg(long, default_value_t = 1.0)]
    pub speed: f64,
    /// Sessions in the day (1 to 4).
    #[arg(long, default_value_t = 4)]
    pub sessions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Impair operator commands, e.g. `latency=200,jitter=50,loss=0.1`.
    #[arg(long, value_parser = parse_channel)]
    pub channel: Option<ChannelModel>,
    /// Event log written as the day runs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Stop once the last session has ended.
    #[arg(long)]
    pub exit_at_day_end: bool,
}

enum Inbound {
    Connect(ConnId, UnboundedSender<Vec<u8>>),
    Command(ConnId, OperatorCommand),
    Disconnect(ConnId),
}

pub fn run(args: ServeArgs) -> Result<()> {
    if !(args.speed.is_finite() && args.speed > 0.0) {
        return Err(CliError::Usage(format!("--speed must be positive, got {}", args.speed)).into());
    }
    if !(1..=4).contains(&args.sessions) {
        return Err(CliError::Usage(format!("--sessions must be 1 to 4, got {}", args.sessions)).into());
    }
    let plan = match &args.floorplan {
        Some(p) => FloorPlan::load(p).map_err(|e| CliError::Config {
            path: p.display().to_string(),
            message: match e {
                WorldError::Io { message, .. } => message,
                other => other.to_string(),
            },
        })?,
        None => FloorPlan::reference(),
    };
    let (roster, roster_name) = match &args.roster {
        Some(p) => {
            let cfg = |message: String| CliError::Config {
                path: p.display().to_string(),
                message,
            };
            let text = std::fs::read_to_string(p).map_err(|e| cfg(e.to_string()))?;
            (Roster::from_json(&text).map_err(|e| cfg(e.to_string()))?, p.display().to_string())
        }
        None => (Roster::reference(), "reference roster".to_string()),
    };

    let session_plan = SessionPlan::standard();
    let schedule = DaySchedule::back_to_back("live", args.sessions, &session_plan);
    let mut config = WorldConfig::reference(args.seed);
    config.robots = avatar_core::world::reference_robots(&plan);
    config.plan = plan;
    config.schedule = schedule.clone();
    config.parties = default_parties(args.sessions);
    let world = WorldState::new(config).map_err(|e| CliError::Config {
        path: args.floorplan.as_ref().map_or("reference plan".into(), |p| p.display().to_string()),
        message: e.to_string(),
    })?;
    let mobile: Vec<_> = world
        .robots()
        .iter()
        .filter(|r| r.state.spec.kind == RobotKind::Mobile)
        .map(|r| r.id)
        .collect();
    let shifts = assign_shifts(&roster.pilots, &schedule, &mobile).map_err(|e| CliError::Config {
        path: roster_name.clone(),
        message: e.to_string(),
    })?;

    let out = match &args.out {
        Some(p) => Some(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => None,
    };

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = TcpListener::bind(&addr).await.map_err(|e| CliError::Bind {
            addr: addr.clone(),
            message: e.to_string(),
        })?;
        let local = listener.local_addr()?;

        let list = |kind: RobotKind| {
            world
                .robots()
                .iter()
                .filter(|r| r.state.spec.kind == kind)
                .map(|r| r.id.to_string())
                .collect::<Vec<_>>()
        };
        let (m, s) = (list(RobotKind::Mobile), list(RobotKind::Stationary));
        println!("avatar-cafe listening on {local}");
        println!("robots: {} mobile ({}), {} stationary ({})", m.len(), m.join(", "), s.len(), s.join(", "));
        println!(
            "day: {} sessions x {} s, speed {}x, tick {} ms, channel {}",
            args.sessions,
            session_plan.cycle_s(),
            args.speed,
            DEFAULT_TICK_MS,
            args.channel.map_or("ideal".to_string(), |c| c.to_string())
        );
        for sh in &shifts {
            println!(
                "shift: {} ({:?}) drives {} in sessions {:?}",
                sh.pilot_id, sh.input_method, sh.robot_id, sh.sessions
            );
        }
        std::io::stdout().flush()?;

        let (tx, rx) = unbounded_channel();
        let channel = args.channel;
        tokio::spawn(async move {
            let mut next = 0u64;
            while let Ok((stream, _)) = listener.accept().await {
                next += 1;
                tokio::spawn(connection(stream, ConnId(next), tx.clone(), channel));
            }
        });
        simulate(world, rx, args.speed, out, args.exit_at_day_end).await
    })
}

async fn simulate(
    mut world: WorldState,
    mut rx: UnboundedReceiver<Inbound>,
    speed: f64,
    mut out: Option<BufWriter<File>>,
    exit_at_day_end: bool,
) -> Result<()> {
    let period = Duration::from_secs_f64(DEFAULT_TICK_MS as f64 / 1000.0 / speed);
    let frame_every = Duration::from_millis(1000 / FRAME_HZ);
    let start = Instant::now();
    let mut last_frame = start;
    let mut conns: BTreeMap<ConnId, UnboundedSender<Vec<u8>>> = BTreeMap::new();
    let mut announced = false;

    let send = |conns: &BTreeMap<ConnId, UnboundedSender<Vec<u8>>>, to: &Recipient, event: RobotEvent| {
        let Ok(bytes) = encode(&Message::Event(event)) else { return };
        match to {
            Recipient::Conn(c) => {
                if let Some(tx) = conns.get(c) {
                    let _ = tx.send(bytes);
                }
            }
            Recipient::All => {
                for tx in conns.values() {
                    let _ = tx.send(bytes.clone());
                }
            }
        }
    };

    for k in 1u64.. {
        // catch up when a tick overran: deadlines are absolute
        tokio::time::sleep_until(start + period.mul_f64(k as f64)).await;
        while let Ok(msg) = rx.try_recv() {
            match msg {
                Inbound::Connect(id, tx) => {
                    conns.insert(id, tx);
                    send(&conns, &Recipient::Conn(id), world.welcome());
                }
                Inbound::Command(id, cmd) => world.submit(id, cmd),
                Inbound::Disconnect(id) => {
                    conns.remove(&id);
                }
            }
        }
        let tick = world.tick();
        if let Some(w) = out.as_mut() {
            for e in &tick.events {
                writeln!(w, "{}", e.to_json_line())?;
            }
            if !tick.events.is_empty() {
                w.flush()?;
            }
        }
        for o in tick.outbound {
            send(&conns, &o.to, o.event);
        }
        let now = Instant::now();
        if now.duration_since(last_frame) >= frame_every {
            last_frame = now;
            send(&conns, &Recipient::All, RobotEvent::WorldViewFrame { view: world.view() });
        }
        if world.is_day_over() && !announced {
            announced = true;
            println!(
                "day over at {} s simulated, {:.1} s wall clock",
                world.clock_ms() / 1000,
                start.elapsed().as_secs_f64()
            );
            std::io::stdout().flush()?;
            if exit_at_day_end {
                break;
            }
        }
    }
    if let Some(w) = out.as_mut() {
        w.flush()?;
    }
    Ok(())
}

async fn connection(stream: TcpStream, id: ConnId, sim: UnboundedSender<Inbound>, channel: Option<ChannelModel>) {
    let (mut rd, mut wr) = stream.into_split();
    let (out_tx, mut out_rx) = unbounded_channel::<Vec<u8>>();
    tokio::spawn(async move {
        while let Some(frame) = out_rx.recv().await {
            if wr.write_all(&frame).await.is_err() {
                break;
            }
        }
    });

    // Impaired link: commands wait in a FIFO until their delivery time, which
    // is non-decreasing per sender, so order is kept.
    let (delay_tx, mut delay_rx) = unbounded_channel::<(Instant, OperatorCommand)>();
    let forward = sim.clone();
    tokio::spawn(async move {
        while let Some((at, cmd)) = delay_rx.recv().await {
            tokio::time::sleep_until(at).await;
            if forward.send(Inbound::Command(id, cmd)).is_err() {
                break;
            }
        }
    });
    let mut link = channel.map(|mut m| {
        m.seed ^= id.0;
        ImpairedChannel::new(m)
    });
    let opened = Instant::now();

    let mut frames = FrameBuffer::new();
    let mut buf = vec![0u8; 8192];
    let mut greeted = false;
    'read: loop {
        let n = match rd.read(&mut buf).await {
            Ok(0) | Err(_) => break,
            Ok(n) => n,
        };
        frames.extend(&buf[..n]);
        while let Some(msg) = frames.next_message() {
            match msg {
                Ok(Message::Hello { .. }) if !greeted => {
                    greeted = true;
                    if sim.send(Inbound::Connect(id, out_tx.clone())).is_err() {
                        break 'read;
                    }
                }
                Ok(Message::Command(cmd)) if greeted => match link.as_mut() {
                    None => {
                        let _ = delay_tx.send((Instant::now(), cmd));
                    }
                    Some(link) => {
                        let sent = opened.elapsed().as_millis() as u64;
                        if let Some(at) = link.send(0, sent) {
                            let _ = delay_tx.send((opened + Duration::from_millis(at), cmd));
                        }
                    }
                },
                Ok(_) => {}
                Err(_) => break 'read,
            }
        }
    }
    let _ = sim.send(Inbound::Disconnect(id));
}
