// A remote agent over twp/1: start a session server in-process, connect,
// claim both red tanks and steer each toward whatever the enemy channel of
// its raster shows. Pass an address (e.g. 127.0.0.1:8736) to play against an
// already running `tanksworld serve` instead.

use std::error::Error;
use std::net::{SocketAddr, TcpStream};
use std::time::Duration;

use tanksworld::raster::{Channel, GRID};
use tanksworld::{Action, ControlSpec, EnvConfig, Observation, ScriptedKind};
use tanksworld_net::protocol::{decode, encode, ActionMsg, Envelope, Message, Role};
use tanksworld_net::{Server, ServerConfig};

/// Turn toward the centroid of lit enemy pixels and fire when it is ahead.
fn chase(obs: &Observation) -> Action {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for row in 0..GRID {
        for col in 0..GRID {
            if obs.get(Channel::Threats as usize, row, col) > 0.0 {
                sx += col as f64;
                sy += row as f64;
                n += 1.0;
            }
        }
    }
    if n == 0.0 {
        return Action::new(0.6, 0.4, -1.0);
    }
    // Ego frame: the tank sits in the middle facing up (row 0).
    let dx = sx / n - GRID as f64 / 2.0;
    let dy = GRID as f64 / 2.0 - sy / n;
    let bearing = dx.atan2(dy);
    let fire = if bearing.abs() < 0.15 { 1.0 } else { -1.0 };
    Action::new(0.3, (-bearing * 2.0).clamp(-1.0, 1.0), fire)
}

fn play(addr: SocketAddr) -> Result<(u64, f64), Box<dyn Error>> {
    let (mut ws, _) = tungstenite::client(format!("ws://{addr}/"), TcpStream::connect(addr)?)?;
    let send = |ws: &mut tungstenite::WebSocket<TcpStream>, session: &str, body| -> Result<(), Box<dyn Error>> {
        Ok(ws.send(tungstenite::Message::Text(encode(&Envelope::new(session, body))))?)
    };
    send(&mut ws, "", Message::Hello {
        role: Role::Agent,
        tanks: vec![],
    })?;
    let mut total = 0.0;
    loop {
        let tungstenite::Message::Text(text) = ws.read()? else { continue };
        let env = decode(&text)?;
        let session = env.session;
        match env.body {
            Message::Assigned { tanks, .. } => println!("driving tanks {tanks:?} in session {session}"),
            Message::ObsFrame(f) => {
                total += f.scalar_reward;
                if f.done {
                    return Ok((f.tick, total));
                }
                if let Some(obs) = f.observation() {
                    let act = chase(&obs?);
                    send(&mut ws, &session, Message::Action(ActionMsg::new(f.tick, f.tank, act)))?;
                }
            }
            Message::Error { code, text } => return Err(format!("{code:?}: {text}").into()),
            _ => {}
        }
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    if let Some(addr) = std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        let (ticks, total) = play(addr)?;
        println!("episode over after {ticks} ticks, scalar return {total:+.1}");
        return Ok(());
    }
    let env = EnvConfig {
        team_size: 2,
        neutral_count: 1,
        max_steps: 60,
        red: ControlSpec::External,
        blue: ControlSpec::scripted(ScriptedKind::Aggressive),
        ..EnvConfig::default()
    };
    let mut cfg = ServerConfig::new(env);
    cfg.addr = SocketAddr::from(([127, 0, 0, 1], 0));
    cfg.barrier_timeout = Duration::from_millis(200);
    cfg.max_episodes = Some(1);
    let server = Server::bind(cfg)?.spawn()?;
    let (ticks, total) = play(server.addr())?;
    let summary = server.join()?;
    println!("episode over after {ticks} ticks, scalar return {total:+.1}");
    println!(
        "server: red {:+.1} blue {:+.1} hash {:016x}",
        summary[0].red_score, summary[0].blue_score, summary[0].final_state_hash
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
