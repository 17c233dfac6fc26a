//! Command implementations. Each returns a JSON summary and a human-readable line.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use image::ImageFormat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tomokit::dynamics::{evolve_field_checkpoints, evolve_tomogram};
use tomokit::entanglement::{dispersion_from_tomograms, separability_test, ProductProvider};
use tomokit::information::{completeness_entropy, polar_projection};
use tomokit::io::{
    read_distribution_csv, read_field, read_matrix_csv, read_tomogram, write_field, write_tomogram,
    write_tomogram_csv, FIELD_MAGIC, TOMOGRAM_MAGIC,
};
use tomokit::phasespace::{make_cat_wigner, make_delta_approx, make_gaussian, make_vacuum};
use tomokit::tomography::{forward_tomogram, inverse_tomogram, radon_tomogram};
use tomokit::{EvolutionSpec, Frame, PhaseSpaceField, PhaseSpaceGrid, PlanarDistribution, Tomogram, Verdict};

use crate::error::{CliError, CliResult, Context};
use crate::manifest::*;
use crate::plot;

pub struct Outcome {
    pub summary: Value,
    pub text: String,
}

pub fn run(manifest: &RunManifest) -> CliResult<Outcome> {
    match manifest {
        RunManifest::GenState(m) => gen_state(m),
        RunManifest::Tomo(m) => tomo(m),
        RunManifest::Invert(m) => invert(m),
        RunManifest::Evolve(m) => evolve(m),
        RunManifest::Entropy(m) => entropy(m),
        RunManifest::Separability(m) => separability(m),
        RunManifest::Plot(m) => plot_cmd(m),
    }
}

fn output(path: &Option<std::path::PathBuf>) -> CliResult<&Path> {
    path.as_deref().ok_or_else(|| CliError::Validation("an output path is required".into()))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

enum Payload {
    Field(PhaseSpaceField),
    Tomogram(Tomogram),
}

/// Reads a field or tomogram, chosen by magic bytes.
fn read_payload(path: &Path) -> CliResult<Payload> {
    let ctx = format!("reading {}", path.display());
    let mut magic = [0u8; 4];
    File::open(path).and_then(|mut f| f.read_exact(&mut magic)).ctx(&ctx)?;
    if &magic == FIELD_MAGIC {
        Ok(Payload::Field(read_field(path).ctx(&ctx)?))
    } else if &magic == TOMOGRAM_MAGIC {
        Ok(Payload::Tomogram(read_tomogram(path).ctx(&ctx)?))
    } else {
        Err(CliError::Io(format!("{ctx}: unrecognized file type")))
    }
}

fn gen_state(m: &GenStateManifest) -> CliResult<Outcome> {
    let out = output(&m.output)?;
    let field = match m.state {
        StateSpec::Vacuum => make_vacuum(m.grid),
        StateSpec::Gaussian {
            q0,
            p0,
            sigma_q,
            sigma_p,
            corr,
        } => make_gaussian(m.grid, q0, p0, sigma_q, sigma_p, corr),
        StateSpec::Delta { q0, p0, eps } => make_delta_approx(m.grid, q0, p0, eps),
        StateSpec::Cat { q0, p0 } => make_cat_wigner(m.grid, q0, p0),
    }
    .ctx("building state")?;
    write_field(out, &field).ctx(&format!("writing {}", out.display()))?;
    Ok(Outcome {
        summary: json!({
            "output": display(out),
            "kind": field.kind(),
            "mass": field.integrate(),
            "min": field.min(),
            "max": field.max(),
        }),
        text: format!("wrote {} ({:?}, mass {:.6})", out.display(), field.kind(), field.integrate()),
    })
}

/// Frames of the spec, in order.
pub fn frames(spec: &FrameSpec) -> Vec<Frame> {
    match spec {
        FrameSpec::Uniform { count } => tomokit::tomography::uniform_angles(*count)
            .into_iter()
            .map(Frame::from_angle)
            .collect(),
        FrameSpec::Angles { angles } => angles.iter().copied().map(Frame::from_angle).collect(),
        FrameSpec::List { frames } => frames.clone(),
        FrameSpec::Random { count, seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count)
                .map(|_| {
                    let f = Frame::from_angle(PI * rng.random::<f64>());
                    match scale {
                        Some([lo, hi]) => f.scaled(lo + (hi - lo) * rng.random::<f64>()),
                        None => f,
                    }
                })
                .collect()
        }
    }
}

fn tomo(m: &TomoManifest) -> CliResult<Outcome> {
    let out = output(&m.output)?;
    let Payload::Field(field) = read_payload(&m.input)? else {
        return Err(CliError::Validation("tomo input must be a field file".into()));
    };
    let frames = frames(&m.frames);
    let tomogram = match m.method {
        TomoMethod::Symplectic => forward_tomogram(&field, &frames, &m.x_grid),
        TomoMethod::Radon => {
            let angles: Vec<f64> = frames.iter().map(Frame::angle).collect();
            radon_tomogram(&field, &angles, &m.x_grid)
        }
    }
    .ctx("forward transform")?;
    write_tomogram(out, &tomogram).ctx(&format!("writing {}", out.display()))?;
    if let Some(csv) = &m.csv {
        write_tomogram_csv(csv, &tomogram).ctx(&format!("writing {}", csv.display()))?;
    }
    Ok(Outcome {
        summary: json!({
            "output": display(out),
            "n_frames": tomogram.n_frames(),
            "n_x": tomogram.x_grid().n,
        }),
        text: format!("wrote {} ({} frames × {} samples)", out.display(), tomogram.n_frames(), tomogram.x_grid().n),
    })
}

fn invert(m: &InvertManifest) -> CliResult<Outcome> {
    let out = output(&m.output)?;
    let Payload::Tomogram(tomogram) = read_payload(&m.input)? else {
        return Err(CliError::Validation("invert input must be a tomogram file".into()));
    };
    let rec = inverse_tomogram(&tomogram, &m.grid, &m.options()).ctx("inverse transform")?;
    write_field(out, &rec.field).ctx(&format!("writing {}", out.display()))?;
    Ok(Outcome {
        summary: json!({
            "output": display(out),
            "raw_mass": rec.raw_mass,
            "renormalization": rec.renormalization,
            "clamped_mass": rec.clamped_mass,
        }),
        text: format!("wrote {} (raw mass {:.6}, clamped {:.3e})", out.display(), rec.raw_mass, rec.clamped_mass),
    })
}

fn evolve(m: &EvolveManifest) -> CliResult<Outcome> {
    output(&m.output)?;
    let potential = m.potential()?;
    let spec_at = |t: f64| {
        let spec = EvolutionSpec::new(t, m.mode).with_hbar(m.hbar);
        match m.dt {
            Some(dt) => spec.with_dt(dt),
            None => spec,
        }
    };
    let times = m.times();
    let mut written = Vec::new();
    match read_payload(&m.input)? {
        Payload::Field(field) => {
            let evo = evolve_field_checkpoints(&field, &potential, &spec_at(m.t_final), &m.checkpoints)
                .ctx("evolving field")?;
            for snap in &evo.snapshots {
                let path = m.checkpoint_path(snap.time).expect("output checked");
                write_field(&path, &snap.field).ctx(&format!("writing {}", path.display()))?;
                written.push(json!({"time": snap.time, "path": display(&path), "clamped_mass": snap.clamped_mass}));
            }
        }
        Payload::Tomogram(tomogram) => {
            let grid = match (m.grid, potential.degree() > 2) {
                (Some(g), _) => g,
                (None, false) => PhaseSpaceGrid::square(1.0, 8)?,
                (None, true) => {
                    return Err(CliError::Validation(
                        "a reconstruction grid is required for tomogram input under this potential".into(),
                    ))
                }
            };
            for &t in &times {
                let evolved = evolve_tomogram(&tomogram, &potential, &spec_at(t), &grid).ctx("evolving tomogram")?;
                let path = m.checkpoint_path(t).expect("output checked");
                write_tomogram(&path, &evolved).ctx(&format!("writing {}", path.display()))?;
                written.push(json!({"time": t, "path": display(&path)}));
            }
        }
    }
    let text = written
        .iter()
        .map(|w| format!("wrote {}", w["path"].as_str().unwrap_or_default()))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        summary: json!({ "checkpoints": written }),
        text,
    })
}

fn write_report(path: &Path, summary: &Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    std::fs::write(path, format!("{text}\n")).ctx(&format!("writing {}", path.display()))
}

fn entropy(m: &EntropyManifest) -> CliResult<Outcome> {
    let ctx = format!("reading {}", m.input.display());
    let p = match m.format() {
        EntropyInput::Distribution => read_distribution_csv(&m.input).ctx(&ctx)?,
        EntropyInput::Planar => {
            let field = read_field(&m.input).ctx(&ctx)?;
            let grid = *field.grid();
            let planar = PlanarDistribution::new(grid, field.into_values()).ctx("planar distribution")?;
            polar_projection(&planar, m.n_theta).ctx("polar projection")?
        }
    };
    let h = completeness_entropy(&p).ctx("relative entropy")?;
    let summary = json!({ "entropy": h, "n_theta": p.len() });
    if let Some(out) = &m.output {
        write_report(out, &summary)?;
    }
    Ok(Outcome {
        summary,
        text: format!("{h:.4}"),
    })
}

fn separability(m: &SeparabilityManifest) -> CliResult<Outcome> {
    let v = match &m.matrix {
        Some(path) => read_matrix_csv(path).ctx(&format!("reading {}", path.display()))?,
        None => {
            let tomograms = m
                .tomograms
                .iter()
                .map(|p| read_tomogram(p).ctx(&format!("reading {}", p.display())))
                .collect::<CliResult<Vec<_>>>()?;
            let provider = ProductProvider::new(tomograms).ctx("tomogram provider")?;
            dispersion_from_tomograms(&provider).ctx("dispersion matrix")?
        }
    };
    let sweep = m.sweep(v.n_modes());
    let report = separability_test(&v, &sweep, m.hbar).ctx("separability test")?;
    let verdict = match report.verdict {
        Verdict::Entangled => "entangled",
        Verdict::SeparableConsistent => "separable-consistent",
    };
    let summary = json!({
        "verdict": verdict,
        "witness": report.witness,
        "witness_parameter": report.witness_parameter,
        "min_eigenvalue": report.min_eigenvalue,
    });
    if let Some(out) = &m.output {
        write_report(out, &summary)?;
    }
    let mut text = verdict.to_string();
    if let Some(w) = &report.witness {
        let parts: Vec<String> = w.lambdas().iter().map(|l| format!("{l:.6}")).collect();
        text.push_str(&format!("\nwitness: [{}]", parts.join(", ")));
    }
    text.push_str(&format!("\nmin eigenvalue: {:.6e}", report.min_eigenvalue));
    Ok(Outcome { summary, text })
}

fn plot_cmd(m: &PlotManifest) -> CliResult<Outcome> {
    let out = output(&m.output)?;
    let img = match read_payload(&m.input)? {
        Payload::Field(field) => plot::field_heatmap(&field, m.width, m.height),
        Payload::Tomogram(tomogram) => {
            let rows = m.rows.clone().unwrap_or_else(|| plot::default_rows(tomogram.n_frames()));
            if let Some(&k) = rows.iter().find(|&&k| k >= tomogram.n_frames()) {
                return Err(CliError::Validation(format!(
                    "row {k} out of range for {} frames",
                    tomogram.n_frames()
                )));
            }
            plot::tomogram_lines(&tomogram, &rows, m.width, m.height)
        }
    };
    img.save_with_format(out, ImageFormat::Png)
        .ctx(&format!("writing {}", out.display()))?;
    Ok(Outcome {
        summary: json!({ "output": display(out), "width": m.width, "height": m.height }),
        text: format!("wrote {}", out.display()),
    })
}
