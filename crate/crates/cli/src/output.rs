//! Output directory layout: CSV diagnostics, JSONL logs, the effective
//! configuration and the final checkpoint.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use goy_core::controller::{Checkpoint, StatsAccumulator, TraceRow};
use goy_core::diagnostics::ShellProfile;
use serde::Serialize;

use crate::config::Settings;

pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    /// Creates the directory and records the effective configuration.
    pub fn create(path: &Path, settings: &Settings) -> std::io::Result<Self> {
        std::fs::create_dir_all(path)?;
        let dir = Self { path: path.to_path_buf() };
        std::fs::write(dir.file("config.txt"), settings.echo())?;
        Ok(dir)
    }

    fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn csv(&self, name: &str, header: &str) -> std::io::Result<CsvWriter> {
        let mut w = BufWriter::new(File::create(self.file(name))?);
        writeln!(w, "{header}")?;
        Ok(CsvWriter { w })
    }

    pub fn jsonl(&self, name: &str) -> std::io::Result<JsonlWriter> {
        Ok(JsonlWriter {
            w: BufWriter::new(File::create(self.file(name))?),
        })
    }

    pub fn write_trace(&self, trace: &[TraceRow]) -> std::io::Result<()> {
        let mut energy = self.csv("energy.csv", "t,energy")?;
        let mut diss = self.csv("dissipation.csv", "t,dissipation,injection")?;
        for r in trace {
            energy.row(&[r.t, r.energy])?;
            diss.row(&[r.t, r.dissipation, r.injection])?;
        }
        energy.finish()?;
        diss.finish()
    }

    pub fn write_stats(&self, stats: &StatsAccumulator) -> std::io::Result<()> {
        self.write_profile("spectrum.csv", stats.mean_spectrum())?;
        self.write_profile("flux.csv", stats.mean_flux())?;
        let mut text = String::from("tau0\n");
        if let Some(t) = stats.tau0() {
            text += &format!("{t:e}\n");
        }
        std::fs::write(self.file("tau0.txt"), text)
    }

    fn write_profile(&self, name: &str, profile: Option<ShellProfile>) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(self.file(name))?);
        match profile {
            Some(p) => p.write_csv(&mut w)?,
            None => writeln!(w, "shell_index,k,value")?,
        }
        w.flush()
    }

    pub fn write_checkpoint(&self, ckpt: &Checkpoint) -> goy_core::Result<()> {
        ckpt.save(&self.file("checkpoint.ckpt"))
    }
}

pub struct CsvWriter {
    w: BufWriter<File>,
}

impl CsvWriter {
    pub fn row(&mut self, values: &[f64]) -> std::io::Result<()> {
        let line: Vec<String> = values.iter().map(|v| format!("{v:e}")).collect();
        writeln!(self.w, "{}", line.join(","))
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.w.flush()
    }
}

pub struct JsonlWriter {
    w: BufWriter<File>,
}

impl JsonlWriter {
    pub fn write<T: Serialize>(&mut self, rec: &T) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.w, rec)?;
        self.w.write_all(b"\n")
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.w.flush()
    }
}
