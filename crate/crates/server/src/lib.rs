//! HTTP front end and model clients for the hyperdesc platform.

pub mod api;
pub mod clients;
pub mod config;
pub mod ui;

use std::net::SocketAddr;
use std::sync::Arc;

pub use api::{router, ApiError, AppState};
pub use config::{Clients, Config};

use hyperdesc_core::Store;

/// Opens the store, then serves until the process is stopped.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let store = Store::open(&config.store_path).map_err(std::io::Error::other)?;
    let state = Arc::new(AppState::new(
        store,
        config.clients(),
        config.policy(),
        config.seed,
        config.api_token.clone(),
    ));
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}
