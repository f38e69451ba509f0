use std::io::{BufRead, Write};
use std::process::ExitCode;

use catalogql::service::{Engine, TimeInput};
use catalogql::startup::{spawn_startup, STAGE_DEADLINE};
use catalogql_cli::render::answer_text;
use catalogql_cli::server;
use catalogql_cli::settings::{build_engine, Cli, Command};
use clap::Parser;

fn time_input(range: Option<&str>) -> TimeInput {
    match range {
        Some(r) if !r.trim().is_empty() => TimeInput::Expression(r.to_string()),
        _ => TimeInput::Question,
    }
}

fn ask(engine: &Engine, question: &str, range: Option<&str>, execute: bool, json: bool) -> Result<(), String> {
    let answer = engine
        .smart_discover(question, &time_input(range), execute, engine.now())
        .map_err(|e| e.to_string())?;
    if json {
        println!("{}", serde_json::to_string_pretty(&answer).map_err(|e| e.to_string())?);
    } else {
        print!("{}", answer_text(&answer));
    }
    Ok(())
}

const REPL_HELP: &str = "\
Type a question, or:
  :range <expr>   fix the time range (`:range` alone clears it)
  :exec           toggle query execution
  :json           toggle JSON output
  :quit           leave";

fn repl(engine: &Engine, mut execute: bool) {
    let mut range: Option<String> = None;
    let mut json = false;
    println!("catalogql: {} metrics loaded. :help for commands.", engine.catalog().snapshot().len());
    let stdin = std::io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        print!("> ");
        let _ = std::io::stdout().flush();
        let Some(Ok(line)) = lines.next() else { break };
        let line = line.trim();
        match line.split_once(' ').unwrap_or((line, "")) {
            ("", _) => {}
            (":quit" | ":q" | "exit" | "quit", _) => break,
            (":help" | ":h", _) => println!("{REPL_HELP}"),
            (":range", expr) => {
                range = Some(expr.trim().to_string()).filter(|s| !s.is_empty());
                println!("range: {}", range.as_deref().unwrap_or("from question"));
            }
            (":exec", _) => {
                execute = !execute;
                println!("execute: {execute}");
            }
            (":json", _) => {
                json = !json;
                println!("json: {json}");
            }
            _ => {
                if let Err(e) = ask(engine, line, range.as_deref(), execute, json) {
                    eprintln!("error: {e}");
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let serving = matches!(cli.command, Some(Command::Serve { .. }));
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if serving { "info" } else { "warn" }))
        .init();

    let engine = match build_engine(&cli.global) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let startup = engine
        .prom()
        .is_some()
        .then(|| spawn_startup(engine.clone(), STAGE_DEADLINE));

    match cli.command {
        Some(Command::Serve { listen }) => {
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            // Startup merges land in the background; /readyz/gpu reports when.
            if let Err(e) = rt.block_on(server::serve(engine, &listen)) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        command => {
            if let Some(h) = startup {
                match h.join() {
                    Ok(s) => s.errors.iter().for_each(|e| log::warn!("startup {e}")),
                    Err(_) => log::warn!("startup thread panicked"),
                }
            }
            match command {
                Some(Command::Ask { question, range, execute, json }) => {
                    match ask(&engine, &question, range.as_deref(), execute, json) {
                        Ok(()) => ExitCode::SUCCESS,
                        Err(e) => {
                            eprintln!("error: {e}");
                            ExitCode::FAILURE
                        }
                    }
                }
                Some(Command::Repl { execute }) => {
                    repl(&engine, execute);
                    ExitCode::SUCCESS
                }
                _ => {
                    repl(&engine, false);
                    ExitCode::SUCCESS
                }
            }
        }
    }
}
