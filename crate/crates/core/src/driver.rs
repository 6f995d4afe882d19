//! Advancing a layer in time under a scheme and mesh strategy.

use crate::error::{KdvError, Result};
use crate::mesh::{equidistribute, lagrangian_advance, monitor_values, MeshLayer};
use crate::projection::project_layer;
use crate::schemes::{step_values, MeshStrategy, SchemeConfig};

/// Number of constant steps of size `dt` from `t0` to `t_final`.
pub fn step_count(t0: f64, t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t_final > t0) {
        return Err(KdvError::InvalidConfig(format!(
            "need t_final > t0 and dt > 0, got t0={t0}, t_final={t_final}, dt={dt}"
        )));
    }
    let steps = ((t_final - t0) / dt).round();
    if (steps * dt - (t_final - t0)).abs() > 1e-9 * (t_final - t0) || steps < 1.0 {
        return Err(KdvError::InvalidConfig(format!(
            "interval {t0}..{t_final} is not a whole number of steps of {dt}"
        )));
    }
    Ok(steps as usize)
}

/// Node positions of the next layer before any projection.
pub fn next_nodes(layer: &MeshLayer, cfg: &SchemeConfig) -> Result<Vec<f64>> {
    match cfg.mesh_strategy {
        MeshStrategy::Fixed => Ok(layer.nodes.clone()),
        MeshStrategy::Lagrangian | MeshStrategy::EvolutionProjection { .. } => {
            lagrangian_advance(layer, cfg.dt, &cfg.boundary)
        }
        MeshStrategy::Adaptive(monitor) => {
            let rho = monitor_values(layer, cfg.dt, monitor, &cfg.boundary);
            equidistribute(layer, &rho, &cfg.boundary, cfg.anchor, cfg.dt)
        }
    }
}

/// One full time step, including the projection of evolution-projection schemes.
pub fn advance(layer: &MeshLayer, cfg: &SchemeConfig) -> Result<MeshLayer> {
    let x_next = next_nodes(layer, cfg)?;
    let values = step_values(layer, &x_next, cfg)?;
    let advanced = MeshLayer {
        time: layer.time + cfg.dt,
        nodes: x_next,
        values,
    };
    match cfg.mesh_strategy {
        MeshStrategy::EvolutionProjection { order, stencil } => {
            project_layer(&advanced, &layer.nodes, order, stencil, &cfg.boundary)
        }
        _ => Ok(advanced),
    }
}

/// Takes `steps` steps from `initial`, calling `observer(k, layer)` after step `k`
/// (and with `k = 0` before the first). Failures are wrapped with the step index.
pub fn simulate(
    initial: &MeshLayer,
    cfg: &SchemeConfig,
    steps: usize,
    mut observer: impl FnMut(usize, &MeshLayer),
) -> Result<MeshLayer> {
    cfg.validate()?;
    cfg.boundary.validate(&initial.nodes)?;
    let t0 = initial.time;
    let mut layer = initial.clone();
    observer(0, &layer);
    for k in 1..=steps {
        let mut next = advance(&layer, cfg).map_err(|e| KdvError::Aborted {
            step: k,
            source: Box::new(e),
        })?;
        next.time = t0 + k as f64 * cfg.dt;
        layer = next;
        observer(k, &layer);
    }
    Ok(layer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryKind, MeshAnchor, MonitorKind};
    use crate::schemes::SchemeKind;
    use crate::solutions::KdvSolution;

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1.0, 2.0, 1e-3).unwrap(), 1000);
        assert_eq!(step_count(0.0, 0.2, 1e-4).unwrap(), 2000);
        assert!(step_count(0.0, 0.2, 3e-2).is_err());
        assert!(step_count(1.0, 0.5, 1e-3).is_err());
    }

    #[test]
    fn aborts_report_the_step() {
        // Converging flow tangles a Lagrangian mesh.
        let boundary = BoundaryKind::DirichletFromExact(KdvSolution::Constant { value: 0.0 });
        let nodes: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let layer = MeshLayer::from_fn(0.0, nodes, |x| -x).unwrap();
        let cfg = SchemeConfig::new(SchemeKind::InvariantTrapezoidalTen, 0.6, boundary, MeshStrategy::Lagrangian);
        match simulate(&layer, &cfg, 5, |_, _| {}) {
            Err(KdvError::Aborted { step, source }) => {
                assert_eq!(step, 2);
                assert!(matches!(*source, KdvError::Tangling { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adaptive_step_with_flat_monitor_keeps_uniform_mesh() {
        let period = 2.0;
        let boundary = BoundaryKind::Periodic { period };
        let nodes: Vec<f64> = (0..20).map(|i| period * i as f64 / 20.0).collect();
        let layer = MeshLayer::from_fn(0.0, nodes.clone(), |_| 1.0).unwrap();
        let cfg = SchemeConfig::new(
            SchemeKind::MomentumConservingInvariant,
            1e-3,
            boundary,
            MeshStrategy::Adaptive(MonitorKind::ArcLengthInvariant { alpha: 1e4 }),
        )
        .with_anchor(MeshAnchor::Lagrangian);
        let next = advance(&layer, &cfg).unwrap();
        for (a, b) in next.nodes.iter().zip(&nodes) {
            assert!((a - b - 1e-3).abs() < 1e-14);
        }
    }
}
