// Spectate a session: one silent agent holds the red tanks (so the barrier
// falls back to zero actions), and a viewer prints a line per frame with the
// ground truth it receives.

use std::error::Error;
use std::net::{SocketAddr, TcpStream};
use std::time::Duration;

use tanksworld::{ControlSpec, EnvConfig, ScriptedKind, Team};
use tanksworld_net::protocol::{decode, encode, Envelope, Message, Role};
use tanksworld_net::{Server, ServerConfig};

type Ws = tungstenite::WebSocket<TcpStream>;

fn connect(addr: SocketAddr, role: Role) -> Result<Ws, Box<dyn Error>> {
    let (mut ws, _) = tungstenite::client(format!("ws://{addr}/"), TcpStream::connect(addr)?)?;
    let hello = Message::Hello { role, tanks: vec![] };
    ws.send(tungstenite::Message::Text(encode(&Envelope::new("", hello))))?;
    Ok(ws)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let env = EnvConfig {
        team_size: 3,
        neutral_count: 2,
        max_steps: 40,
        red: ControlSpec::External,
        blue: ControlSpec::scripted(ScriptedKind::Patrol),
        ..EnvConfig::default()
    };
    let mut cfg = ServerConfig::new(env);
    cfg.addr = SocketAddr::from(([127, 0, 0, 1], 0));
    cfg.barrier_timeout = Duration::from_millis(10);
    cfg.max_episodes = Some(1);
    let server = Server::bind(cfg)?.spawn()?;

    let mut viewer = connect(server.addr(), Role::Viewer)?;
    // Keep the agent socket open so its claims hold for the whole episode.
    let _agent = connect(server.addr(), Role::Agent)?;

    loop {
        let msg = match viewer.read() {
            Ok(tungstenite::Message::Text(t)) => decode(&t)?.body,
            Ok(_) => continue,
            Err(_) => break,
        };
        let Message::StateFrame(f) = msg else { continue };
        let alive = |team| f.entities.iter().filter(|e| e.team == team && e.alive).count();
        let spotted: usize = f.visibility.values().map(|v| v.enemies.len()).sum();
        if f.tick % 5 == 0 || f.done {
            println!(
                "tick {:>3}  alive red {} blue {} neutral {}  enemy sightings {:>2}  score {:+.0}:{:+.0}",
                f.tick,
                alive(Team::Red),
                alive(Team::Blue),
                alive(Team::Neutral),
                spotted,
                f.red_score,
                f.blue_score
            );
        }
        if f.done {
            break;
        }
    }
    let summary = server.join()?;
    println!("{} episode(s) served", summary.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
