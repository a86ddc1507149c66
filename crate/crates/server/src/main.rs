use stl_dialogue_server::{app, Service, DATA_DIR_ENV};

const ADDR_ENV: &str = "STL_DIALOGUE_ADDR";

#[tokio::main]
async fn main() {
    let service = match Service::from_env() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    };
    let addr = std::env::var(ADDR_ENV).unwrap_or_else(|_| "127.0.0.1:8080".into());
    let listener = match tokio::net::TcpListener::bind(&addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {addr}: {e}");
            std::process::exit(1);
        }
    };
    match std::env::var(DATA_DIR_ENV) {
        Ok(dir) => eprintln!("listening on {addr}, sessions in {dir}"),
        Err(_) => eprintln!("listening on {addr}, sessions in memory (set {DATA_DIR_ENV} to persist)"),
    }
    if let Err(e) = axum::serve(listener, app(service)).await {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
