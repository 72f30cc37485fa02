use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;

use cxreval::llm_labeler::{ScriptedService, StubServer};

use super::open_input;
use crate::failure::{CmdResult, Failure};
use crate::StubArgs;

pub fn run(args: StubArgs) -> CmdResult {
    let mut service = match &args.script {
        Some(p) => ScriptedService::from_jsonl(open_input(p)?)
            .with_context(|| format!("invalid stub script {}", p.display()))
            .map_err(Failure::input)?,
        None => ScriptedService::new(Vec::new()),
    };
    if args.latency_ms > 0 {
        service = service.with_latency(Duration::from_millis(args.latency_ms));
    }
    let server = StubServer::start(&args.addr, Arc::new(service)).map_err(Failure::input)?;
    println!("{}", server.url());
    server.join();
    Ok(())
}
