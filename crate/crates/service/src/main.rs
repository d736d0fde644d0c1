use std::path::PathBuf;
use std::sync::Arc;

use ahp_service::{router, Store};
use clap::Parser;

#[derive(Parser)]
#[command(name = "ahp-service", about = "Elicitation session service", version)]
struct Args {
    /// Address to listen on
    #[arg(long, env = "AHP_SERVICE_ADDR", default_value = "127.0.0.1:8080")]
    addr: String,
    /// Directory holding session and results files
    #[arg(long, env = "AHP_DATA_DIR", default_value = "sessions")]
    data_dir: PathBuf,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("AHP_LOG_LEVEL", "info")).init();
    let args = Args::parse();
    let store = Arc::new(Store::open(&args.data_dir)?);
    let listener = tokio::net::TcpListener::bind(&args.addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
