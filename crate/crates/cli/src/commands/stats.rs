use cxreval::biostats::{power_simulation, sample_size as compute_sample_size, SampleSizeResult};

use super::{create_dir, parse_flag, to_json_line, write_output};
use crate::config::PipelineConfig;
use crate::failure::{CmdResult, Failure};
use crate::{PowerArgs, SampleSizeArgs};

/// Configured pairs per simulated study, or the unrounded sample size.
pub fn n_pairs_for(cfg: &PipelineConfig, ss: &SampleSizeResult) -> usize {
    if cfg.power.n_pairs > 0 {
        cfg.power.n_pairs
    } else {
        ss.n_base as usize
    }
}

pub fn sample_size(mut cfg: PipelineConfig, args: SampleSizeArgs) -> CmdResult {
    let s = &mut cfg.sample_size;
    args.delta.inspect(|v| s.delta = *v);
    args.sigma.inspect(|v| s.sigma_diff = *v);
    args.alpha.inspect(|v| s.alpha = *v);
    args.power.inspect(|v| s.power = *v);
    args.dropout.inspect(|v| s.dropout_rate = *v);
    if let Some(r) = &args.rounding {
        s.rounding = parse_flag("rounding", r)?;
    }
    let result = compute_sample_size(&s.spec(), s.rounding).map_err(Failure::input)?;
    let json = to_json_line(&result);
    if args.json {
        print!("{json}");
    } else {
        println!("n_raw = {:.4}", result.n_raw);
        println!("n_base = {}", result.n_base);
        println!("n_enrolled = {}", result.n_enrolled);
        println!("n_enrolled_exact_ceil = {}", result.n_enrolled_exact_ceil);
    }
    if let Some(out) = &args.out {
        create_dir(out)?;
        write_output(&out.join("sample_size.json"), json)?;
        cfg.write_snapshot(out).map_err(Failure::internal)?;
    }
    Ok(())
}

pub fn power_sim(mut cfg: PipelineConfig, args: PowerArgs) -> CmdResult {
    let s = &mut cfg.sample_size;
    args.delta.inspect(|v| s.delta = *v);
    args.sigma.inspect(|v| s.sigma_diff = *v);
    args.alpha.inspect(|v| s.alpha = *v);
    args.n_pairs.inspect(|v| cfg.power.n_pairs = *v);
    args.trials.inspect(|v| cfg.power.trials = *v);
    let spec = cfg.sample_size.spec();
    // a null-effect simulation has no sample size, so only compute it when needed
    let n = match cfg.power.n_pairs {
        0 => n_pairs_for(&cfg, &compute_sample_size(&spec, cfg.sample_size.rounding).map_err(Failure::input)?),
        n => n,
    };
    let result = power_simulation(&spec, n, cfg.power.trials, cfg.seed).map_err(Failure::input)?;
    let json = to_json_line(&result);
    if args.json {
        print!("{json}");
    } else {
        println!("n_pairs = {}", result.n_pairs);
        println!("trials = {}", result.trials);
        println!("power = {:.4} (MC s.e. {:.4})", result.power, result.mc_standard_error);
        println!("normal_approximation = {:.4}", result.normal_approximation);
    }
    if let Some(out) = &args.out {
        create_dir(out)?;
        write_output(&out.join("power.json"), json)?;
        cfg.write_snapshot(out).map_err(Failure::internal)?;
    }
    Ok(())
}
