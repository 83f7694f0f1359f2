use std::net::{SocketAddr, ToSocketAddrs};

pub const DEFAULT_ENGINE_PORT: u16 = 47001;
pub const DEFAULT_PROXY_PORT: u16 = 47000;
/// Overrides any endpoint given on the command line.
pub const ENDPOINT_ENV: &str = "LUSIM_ENDPOINT";

/// Picks the endpoint from the environment, then `flag`, then `127.0.0.1:default_port`.
pub fn resolve_endpoint(flag: Option<&str>, default_port: u16) -> Result<SocketAddr, String> {
    let env = std::env::var(ENDPOINT_ENV).ok().filter(|s| !s.trim().is_empty());
    resolve_endpoint_from(env.as_deref(), flag, default_port)
}

pub fn resolve_endpoint_from(env: Option<&str>, flag: Option<&str>, default_port: u16) -> Result<SocketAddr, String> {
    match env.or(flag) {
        None => Ok(SocketAddr::from(([127, 0, 0, 1], default_port))),
        Some(text) => {
            let text = text.trim();
            text.to_socket_addrs()
                .map_err(|e| format!("invalid endpoint `{text}`: {e}"))?
                .next()
                .ok_or_else(|| format!("endpoint `{text}` resolves to no address"))
        }
    }
}
