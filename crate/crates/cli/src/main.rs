use clap::Parser;
use sgc_cli::cli::{Cli, Command};
use sgc_cli::commands::{chernoff_map, cluster, experiment, project, sample, scatter};
use sgc_cli::config;
use sgc_cli::Outcome;

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => std::process::exit(outcome.exit_code()),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let file = match &cli.global.config {
        Some(path) => Some(config::load_config_file(path)?),
        None => None,
    };
    if let Some(file) = &file {
        config::check_command(file, cli.command.name())?;
    }
    let global = config::resolve_global(&cli.global, file.as_ref());

    env_logger::Builder::new()
        .parse_filters(&global.log_level)
        .format_timestamp(None)
        .init();

    match cli.command {
        Command::Sample(flags) => {
            let mut params: sample::SampleParams = config::command_params(file.as_ref())?;
            params.overlay(flags);
            sample::run(&global, &params)
        }
        Command::Cluster(flags) => {
            let mut params: cluster::ClusterParams = config::command_params(file.as_ref())?;
            params.overlay(flags);
            cluster::run(&global, &params)
        }
        Command::Project(flags) => {
            let mut params: project::ProjectParams = config::command_params(file.as_ref())?;
            params.overlay(flags);
            project::run(&global, &params)
        }
        Command::Experiment(flags) => {
            let mut params: experiment::ExperimentParams = config::command_params(file.as_ref())?;
            params.overlay(flags);
            experiment::run(&global, &params)
        }
        Command::ChernoffMap(flags) => {
            let mut params: chernoff_map::ChernoffMapParams = config::command_params(file.as_ref())?;
            params.overlay(flags);
            chernoff_map::run(&global, &params)
        }
        Command::Scatter(flags) => {
            let mut params: scatter::ScatterParams = config::command_params(file.as_ref())?;
            params.overlay(flags);
            scatter::run(&global, &params)
        }
    }
}
