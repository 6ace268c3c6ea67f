mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdout, Stdio};
use std::time::{Duration, Instant};

use avatar_core::protocol::{encode, CommandKind, FrameBuffer, Message, OperatorCommand, RejectReason, RobotEvent};
use avatar_core::session::SessionPlan;
use avatar_core::telemetry::session_metrics;
use avatar_core::world::EventLog;
use avatar_core::RobotId;
use common::*;

struct Server {
    child: Child,
    out: BufReader<ChildStdout>,
    banner: Vec<String>,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Server {
    fn start(extra: &[&str]) -> Server {
        let mut child = bin()
            .args(["serve", "--floorplan", &fixture("floorplan.json"), "--roster", &fixture("roster.json"), "--port", "0"])
            .args(extra)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut out = BufReader::new(child.stdout.take().unwrap());
        let mut banner = Vec::new();
        loop {
            let mut l = String::new();
            assert!(out.read_line(&mut l).unwrap() > 0, "server exited during banner: {banner:?}");
            let shift = l.starts_with("shift:");
            banner.push(l.trim_end().to_owned());
            // three mobile robots, one shift line each
            if shift && banner.iter().filter(|b| b.starts_with("shift:")).count() == 3 {
                break;
            }
        }
        Server { child, out, banner }
    }

    fn addr(&self) -> String {
        self.banner[0].rsplit(' ').next().unwrap().to_owned()
    }
}

struct Client {
    stream: TcpStream,
    buf: FrameBuffer,
}

impl Client {
    fn connect(addr: &str, robot: u32) -> Client {
        let stream = TcpStream::connect(addr).unwrap();
        stream.set_read_timeout(Some(Duration::from_millis(200))).unwrap();
        let mut c = Client { stream, buf: FrameBuffer::new() };
        c.send(&Message::Hello { client: "test".into(), robot_id: Some(RobotId(robot)) });
        c
    }

    fn send(&mut self, m: &Message) {
        self.stream.write_all(&encode(m).unwrap()).unwrap();
    }

    /// First event matching `pick` within `secs`.
    fn wait_for<T>(&mut self, secs: u64, mut pick: impl FnMut(&RobotEvent) -> Option<T>) -> T {
        let deadline = Instant::now() + Duration::from_secs(secs);
        let mut chunk = [0u8; 4096];
        while Instant::now() < deadline {
            while let Some(m) = self.buf.next_message() {
                if let Message::Event(e) = m.expect("well-formed frame") {
                    if let Some(t) = pick(&e) {
                        return t;
                    }
                }
            }
            match self.stream.read(&mut chunk) {
                Ok(0) => panic!("server closed the connection"),
                Ok(n) => self.buf.extend(&chunk[..n]),
                Err(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {}
                Err(e) => panic!("{e}"),
            }
        }
        panic!("timed out after {secs} s");
    }
}

#[test]
fn banner_lists_robots_and_shifts() {
    let s = Server::start(&[]);
    assert!(s.banner[0].starts_with("avatar-cafe listening on 127.0.0.1:"), "{:?}", s.banner);
    assert!(s.banner.iter().any(|l| l == "robots: 3 mobile (R1, R2, R3), 2 stationary (R4, R5)"), "{:?}", s.banner);
    assert!(s.banner.iter().any(|l| l.starts_with("day: 4 sessions x 3600 s")), "{:?}", s.banner);
}

#[test]
fn operator_session_over_the_wire() {
    let s = Server::start(&[]);
    let mut c = Client::connect(&s.addr(), 1);
    let robots = c.wait_for(5, |e| match e {
        RobotEvent::Welcome { protocol_version, robots } => Some((*protocol_version, robots.len())),
        _ => None,
    });
    assert_eq!(robots, (1, 5));
    c.send(&OperatorCommand::new(1, RobotId(1), CommandKind::SelectHeadMotion { motion: "nod_once".into() }).into());
    c.send(&OperatorCommand::new(2, RobotId(1), CommandKind::SelectArmMotion { motion: "moonwalk".into() }).into());
    c.send(&OperatorCommand::new(3, RobotId(9), CommandKind::Stop).into());
    let mut acked = false;
    let mut rejects = Vec::new();
    c.wait_for(5, |e| {
        match e {
            RobotEvent::Ack { seq: 1 } => acked = true,
            RobotEvent::Reject { seq, reason } => rejects.push((*seq, *reason)),
            _ => {}
        }
        (acked && rejects.len() == 2).then_some(())
    });
    rejects.sort_by_key(|r| r.0);
    assert_eq!(rejects, vec![(2, RejectReason::UnknownMotion), (3, RejectReason::UnknownRobot)]);
    let robots = c.wait_for(5, |e| match e {
        RobotEvent::WorldViewFrame { view } => Some(view.robots.len()),
        _ => None,
    });
    assert_eq!(robots, 5);
}

#[test]
fn garbage_does_not_take_the_server_down() {
    let s = Server::start(&[]);
    let mut bad = TcpStream::connect(s.addr()).unwrap();
    bad.write_all(&[0, 0, 0, 5, 9, b'{', b'x', b'}', 0]).unwrap();
    drop(bad);
    let mut c = Client::connect(&s.addr(), 2);
    c.wait_for(5, |e| matches!(e, RobotEvent::Welcome { .. }).then_some(()));
}

#[test]
fn missing_floorplan_exits_with_config_error() {
    let o = run(&["serve", "--floorplan", "/nonexistent/plan.json", "--port", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/plan.json"), "{}", stderr(&o));
}

#[test]
fn out_of_range_sessions_is_a_usage_error() {
    let o = run(&["serve", "--sessions", "5", "--port", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn taken_port_is_a_bind_error() {
    let holder = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = holder.local_addr().unwrap().port().to_string();
    let o = run(&["serve", "--port", &port]);
    assert_eq!(o.status.code(), Some(3));
}

/// One session at 60x should take a wall-clock minute and log a full
/// session's working time.
#[test]
fn accelerated_session_keeps_pace() {
    let dir = tempdir("pace");
    let log = dir.join("day.jsonl");
    let started = Instant::now();
    let mut s = Server::start(&["--speed", "60", "--sessions", "1", "--exit-at-day-end", "--out", log.to_str().unwrap()]);
    let mut rest = String::new();
    s.out.read_to_string(&mut rest).unwrap();
    let status = s.child.wait().unwrap();
    let wall = started.elapsed().as_secs_f64();
    assert!(status.success());
    assert!(rest.contains("day over at 3600 s simulated"), "{rest}");
    assert!((54.0..=66.0).contains(&wall), "took {wall:.1} s");
    let log = EventLog::from_jsonl_str(&std::fs::read_to_string(&log).unwrap()).unwrap();
    for robot in log.robots() {
        let m = session_metrics(&log.for_robot(robot), &SessionPlan::standard()).unwrap();
        assert_eq!(m.working_time_s, 3300, "{robot}");
    }
}
