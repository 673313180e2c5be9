//! Python bindings: the main solver types and operations, thin wrappers
//! over `casimir-core`.

use nalgebra::{Unit, UnitQuaternion, Vector3};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use casimir_core::materials::{DielectricTable, LorentzOscillator, PolarizabilityModel};
use casimir_core::observables::{self, SweepSpec};
use casimir_core::spectrum::QuadratureSpec;
use casimir_core::{
    oracle, preset_scene, CoreError, DielectricModel, ImagFrequency, Mode, PresetParams,
    SeparationConvention,
};

pyo3::create_exception!(casimir_py, SolverError, pyo3::exceptions::PyException);

fn err(e: CoreError) -> PyErr {
    SolverError::new_err(e.to_string())
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "retarded" => Ok(Mode::Retarded),
        "nonretarded" => Ok(Mode::NonRetarded),
        other => Err(PyValueError::new_err(format!(
            "mode '{other}' is not 'retarded' or 'nonretarded'"
        ))),
    }
}

fn parse_convention(s: &str) -> PyResult<SeparationConvention> {
    match s {
        "sphere_surface_gap" => Ok(SeparationConvention::SphereSurfaceGap),
        "face_gap" => Ok(SeparationConvention::FaceGap),
        "center_distance" => Ok(SeparationConvention::CenterDistance),
        other => Err(PyValueError::new_err(format!(
            "convention '{other}' is not sphere_surface_gap, face_gap or center_distance"
        ))),
    }
}

fn vec3(v: [f64; 3]) -> Vector3<f64> {
    Vector3::new(v[0], v[1], v[2])
}

/// Dielectric function ε(iξ) on the imaginary frequency axis.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Material {
    inner: DielectricModel,
}

#[pymethods]
impl Material {
    /// Drude metal: ε(iξ) = 1 + ωp²/(ξ(ξ+γ)).
    #[staticmethod]
    fn drude(plasma_ev: f64, damping_ev: f64) -> Material {
        Material {
            inner: DielectricModel::drude(plasma_ev, damping_ev),
        }
    }

    /// Lorentz oscillators given as (strength_eV², resonance_eV, damping_eV).
    #[staticmethod]
    fn lorentz(oscillators: Vec<(f64, f64, f64)>) -> Material {
        Material {
            inner: DielectricModel::lorentz(
                oscillators
                    .into_iter()
                    .map(|(s, w, g)| LorentzOscillator {
                        strength_ev2: s,
                        resonance_ev: w,
                        damping_ev: g,
                    })
                    .collect(),
            ),
        }
    }

    #[staticmethod]
    fn constant(eps: f64) -> PyResult<Material> {
        Ok(Material {
            inner: DielectricModel::constant(eps).map_err(err)?,
        })
    }

    #[staticmethod]
    fn perfect_metal() -> Material {
        Material {
            inner: DielectricModel::PerfectMetal,
        }
    }

    /// Tabulated (ξ_eV, ε) rows, strictly increasing ξ.
    #[staticmethod]
    fn tabulated(rows: Vec<(f64, f64)>) -> PyResult<Material> {
        Ok(Material {
            inner: DielectricModel::Tabulated {
                table: DielectricTable::new(rows).map_err(err)?,
            },
        })
    }

    #[staticmethod]
    fn maxwell_garnett(inclusion: &Material, host: &Material, fill: f64) -> PyResult<Material> {
        Ok(Material {
            inner: DielectricModel::maxwell_garnett(
                inclusion.inner.clone(),
                host.inner.clone(),
                fill,
            )
            .map_err(err)?,
        })
    }

    /// Bundled material by name (gold, aluminum, perfect_metal, silicon,
    /// polystyrene).
    #[staticmethod]
    fn by_name(name: &str) -> PyResult<Material> {
        casimir_core::materials::builtin_material(name)
            .map(|inner| Material { inner })
            .ok_or_else(|| {
                PyValueError::new_err(format!(
                    "unknown material '{name}' (expected one of {:?})",
                    casimir_core::materials::builtin_material_names()
                ))
            })
    }

    /// ε(iξ) at a non-retarded node; returns inf for a perfect metal.
    fn eval_epsilon(&self, xi_ev: f64) -> PyResult<f64> {
        let xi = ImagFrequency::non_retarded(xi_ev).map_err(err)?;
        self.inner.eval(xi).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Material({:?})", self.inner)
    }
}

/// Polarizability model of one inclusion.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Inclusion {
    inner: PolarizabilityModel,
}

#[pymethods]
impl Inclusion {
    #[staticmethod]
    fn sphere_radiative(radius_um: f64, material: &Material) -> Inclusion {
        Inclusion {
            inner: PolarizabilityModel::SphereRadiative {
                radius_um,
                material: material.inner.clone(),
            },
        }
    }

    #[staticmethod]
    fn sphere_static(radius_um: f64, material: &Material) -> Inclusion {
        Inclusion {
            inner: PolarizabilityModel::SphereStatic {
                radius_um,
                material: material.inner.clone(),
            },
        }
    }

    /// Static spheroid with the given semi-axes; `axis`/`angle_rad` orient
    /// the principal frame.
    #[staticmethod]
    #[pyo3(signature = (semi_axes_um, material, axis=None, angle_rad=0.0))]
    fn spheroid_static(
        semi_axes_um: [f64; 3],
        material: &Material,
        axis: Option<[f64; 3]>,
        angle_rad: f64,
    ) -> Inclusion {
        let orientation = match axis {
            Some(a) => UnitQuaternion::from_axis_angle(&Unit::new_normalize(vec3(a)), angle_rad),
            None => UnitQuaternion::identity(),
        };
        Inclusion {
            inner: PolarizabilityModel::SpheroidStatic {
                semi_axes_um: (semi_axes_um[0], semi_axes_um[1], semi_axes_um[2]),
                orientation,
                material: material.inner.clone(),
            },
        }
    }

    /// Polarizability tensor (3×3, μm³) at one node.
    #[pyo3(signature = (xi_ev, retarded=false))]
    fn alpha(&self, xi_ev: f64, retarded: bool) -> PyResult<Vec<Vec<f64>>> {
        let xi = if retarded {
            ImagFrequency::retarded(xi_ev)
        } else {
            ImagFrequency::non_retarded(xi_ev)
        }
        .map_err(err)?;
        let m = self.inner.alpha(xi).map_err(err)?.as_matrix();
        Ok((0..3)
            .map(|i| (0..3).map(|j| m[(i, j)]).collect())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Inclusion({:?})", self.inner)
    }
}

/// Rigid cluster of inclusions.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Body {
    inner: casimir_core::Body,
}

#[pymethods]
impl Body {
    /// Cut a lattice to a shape. `shape` is `("cube", [side])`,
    /// `("box", [lx, ly, lz])` or `("circular_cylinder", [radius, height])`.
    #[staticmethod]
    #[pyo3(signature = (shape, spacing_um, counts, inclusion, stretch=None))]
    fn cluster(
        shape: (String, Vec<f64>),
        spacing_um: [f64; 3],
        counts: [u32; 3],
        inclusion: &Inclusion,
        stretch: Option<[f64; 3]>,
    ) -> PyResult<Body> {
        let shape = match (shape.0.as_str(), shape.1.as_slice()) {
            ("cube", [side]) => casimir_core::Shape::Cube { side_um: *side },
            ("box", [lx, ly, lz]) => casimir_core::Shape::Box {
                lx_um: *lx,
                ly_um: *ly,
                lz_um: *lz,
            },
            ("circular_cylinder", [r, h]) => casimir_core::Shape::CircularCylinder {
                radius_um: *r,
                height_um: *h,
            },
            _ => {
                return Err(PyValueError::new_err(
                    "shape must be ('cube', [side]), ('box', [lx, ly, lz]) or \
                     ('circular_cylinder', [radius, height])",
                ))
            }
        };
        let lattice = casimir_core::Lattice {
            spacings_um: (spacing_um[0], spacing_um[1], spacing_um[2]),
            counts: (counts[0], counts[1], counts[2]),
            stretch: stretch
                .map(|s| (s[0], s[1], s[2]))
                .unwrap_or((1.0, 1.0, 1.0)),
        };
        Ok(Body {
            inner: casimir_core::build_cluster(&shape, &lattice, &inclusion.inner).map_err(err)?,
        })
    }

    /// Single inclusion at a position.
    #[staticmethod]
    fn particle(position_um: [f64; 3], inclusion: &Inclusion) -> PyResult<Body> {
        Ok(Body {
            inner: casimir_core::Body::new(vec![casimir_core::Particle {
                position_um: vec3(position_um),
                polarizability: inclusion.inner.clone(),
            }])
            .map_err(err)?,
        })
    }

    fn translated(&self, delta_um: [f64; 3]) -> Body {
        Body {
            inner: self.inner.translated(vec3(delta_um)),
        }
    }

    fn rotated_about_center(&self, axis: [f64; 3], angle_rad: f64) -> Body {
        Body {
            inner: self
                .inner
                .rotated_about_center(Unit::new_normalize(vec3(axis)), angle_rad),
        }
    }

    /// Lab-frame particle positions, μm.
    fn positions(&self) -> Vec<[f64; 3]> {
        self.inner
            .lab_positions()
            .into_iter()
            .map(|p| [p.x, p.y, p.z])
            .collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// A set of bodies sharing an interaction mode.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Scene {
    inner: casimir_core::Scene,
}

#[pymethods]
impl Scene {
    #[new]
    #[pyo3(signature = (bodies, mode="retarded"))]
    fn new(bodies: Vec<Body>, mode: &str) -> PyResult<Scene> {
        let mode = parse_mode(mode)?;
        Ok(Scene {
            inner: casimir_core::Scene::new(bodies.into_iter().map(|b| b.inner).collect(), mode)
                .map_err(err)?,
        })
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    fn particle_count(&self) -> usize {
        self.inner.particle_count()
    }

    fn digest(&self) -> String {
        format!("{:016x}", observables::scene_digest(&self.inner))
    }

    /// Recommended quadrature map scale for this scene, eV.
    fn suggested_map_scale_ev(&self) -> f64 {
        casimir_core::suggested_map_scale(&self.inner)
    }
}

/// A bundled scenario: scene plus sweep bookkeeping.
#[pyclass]
struct Preset {
    #[pyo3(get)]
    scene: Py<Scene>,
    #[pyo3(get)]
    axis: [f64; 3],
    #[pyo3(get)]
    separation_um: f64,
    #[pyo3(get)]
    angle_rad: f64,
    #[pyo3(get)]
    sweep_body: usize,
}

/// Build a bundled preset scene.
#[pyfunction]
#[pyo3(signature = (name, length_um=None, area_um2=None, separation_um=None, convention=None,
                    angle_rad=None, resolution=None, counts=None, radius_um=None, material=None,
                    mode=None, static_spheres=false, variant=None))]
#[allow(clippy::too_many_arguments)]
fn preset(
    py: Python<'_>,
    name: &str,
    length_um: Option<f64>,
    area_um2: Option<f64>,
    separation_um: Option<f64>,
    convention: Option<String>,
    angle_rad: Option<f64>,
    resolution: Option<u32>,
    counts: Option<[u32; 3]>,
    radius_um: Option<f64>,
    material: Option<Material>,
    mode: Option<String>,
    static_spheres: bool,
    variant: Option<String>,
) -> PyResult<Preset> {
    let params = PresetParams {
        length_um,
        area_um2,
        separation_um,
        convention: convention.as_deref().map(parse_convention).transpose()?,
        angle_rad,
        resolution,
        counts: counts.map(|c| (c[0], c[1], c[2])),
        radius_um,
        material: material.map(|m| m.inner),
        mode: mode.as_deref().map(parse_mode).transpose()?,
        static_spheres,
        variant,
    };
    let built = preset_scene(name, &params).map_err(err)?;
    let axis = built.axis.into_inner();
    Ok(Preset {
        scene: Py::new(py, Scene { inner: built.scene })?,
        axis: [axis.x, axis.y, axis.z],
        separation_um: built.separation_um,
        angle_rad: built.angle_rad,
        sweep_body: built.sweep_body,
    })
}

/// Names of the bundled presets.
#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    casimir_core::PRESET_NAMES.to_vec()
}

fn quadrature(
    nodes: usize,
    map_scale_ev: Option<f64>,
    scene: &casimir_core::Scene,
) -> PyResult<QuadratureSpec> {
    let scale = map_scale_ev.unwrap_or_else(|| casimir_core::suggested_map_scale(scene));
    QuadratureSpec::gauss_mapped(nodes, scale).map_err(err)
}

/// Interaction energy of a scene; returns a dict with `energy_ev`,
/// `quad_error_ev`, `node_count` and the sampled integrand.
#[pyfunction]
#[pyo3(signature = (scene, nodes=40, map_scale_ev=None))]
fn interaction_energy<'py>(
    py: Python<'py>,
    scene: &Scene,
    nodes: usize,
    map_scale_ev: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let quad = quadrature(nodes, map_scale_ev, &scene.inner)?;
    let result = casimir_core::interaction_energy(&scene.inner, &quad).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("energy_ev", result.energy_ev)?;
    out.set_item("quad_error_ev", result.quad_error_ev)?;
    out.set_item("node_count", result.node_count)?;
    out.set_item("integrand", result.integrand_samples)?;
    Ok(out)
}

/// Log-determinant difference between the coupled and decoupled systems.
#[pyfunction]
fn delta_logdet(scene: &Scene, xi_ev: f64) -> PyResult<f64> {
    let xi = ImagFrequency::for_mode(scene.inner.mode, xi_ev).map_err(err)?;
    casimir_core::delta_logdet(&scene.inner, xi).map_err(err)
}

/// Sweep result rows plus a power-law fitter.
#[pyclass]
struct Sweep {
    inner: observables::SweepResult,
}

#[pymethods]
impl Sweep {
    /// Rows as dicts: param, energy_ev, derivative (force/torque), quad_error_ev.
    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .rows
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("param", r.param)?;
                d.set_item("energy_ev", r.energy_ev)?;
                d.set_item("derivative", r.derivative)?;
                d.set_item("quad_error_ev", r.quad_error_ev)?;
                Ok(d)
            })
            .collect()
    }

    /// Least-squares power-law fit of |derivative| vs param over a window:
    /// returns (exponent, stderr).
    fn fit_power_law(&self, window: (f64, f64)) -> PyResult<(f64, f64)> {
        observables::fit_power_law(&self.inner, window).map_err(err)
    }

    /// The sweep as CSV text (param,energy_eV,derivative,quad_error_eV).
    fn to_csv(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        observables::write_sweep_csv(&self.inner, &mut buf, None)
            .map_err(|e| SolverError::new_err(e.to_string()))?;
        String::from_utf8(buf).map_err(|e| SolverError::new_err(e.to_string()))
    }
}

/// Separation sweep: moves `body_index` along `axis`; `reference` is the
/// separation of the scene as given. Forces are −dU/dz in eV/μm.
#[pyfunction]
#[pyo3(signature = (scene, axis, reference, grid, body_index=1, fd_step=1e-3, nodes=40,
                    map_scale_ev=None, allow_one_sided=false))]
#[allow(clippy::too_many_arguments)]
fn sweep_separation(
    scene: &Scene,
    axis: [f64; 3],
    reference: f64,
    grid: Vec<f64>,
    body_index: usize,
    fd_step: f64,
    nodes: usize,
    map_scale_ev: Option<f64>,
    allow_one_sided: bool,
) -> PyResult<Sweep> {
    let quad = quadrature(nodes, map_scale_ev, &scene.inner)?;
    let mut spec =
        SweepSpec::separation(Unit::new_normalize(vec3(axis)), reference, grid, body_index)
            .with_fd_step(fd_step);
    spec.allow_one_sided = allow_one_sided;
    Ok(Sweep {
        inner: observables::sweep(&scene.inner, &spec, &quad).map_err(err)?,
    })
}

/// Angle sweep: rotates `body_index` about `axis` through its centre;
/// torques are −dU/dθ in eV/rad.
#[pyfunction]
#[pyo3(signature = (scene, axis, reference, grid, body_index=1, fd_step=1e-3, nodes=40,
                    map_scale_ev=None))]
#[allow(clippy::too_many_arguments)]
fn sweep_angle(
    scene: &Scene,
    axis: [f64; 3],
    reference: f64,
    grid: Vec<f64>,
    body_index: usize,
    fd_step: f64,
    nodes: usize,
    map_scale_ev: Option<f64>,
) -> PyResult<Sweep> {
    let quad = quadrature(nodes, map_scale_ev, &scene.inner)?;
    let spec = SweepSpec::angle(Unit::new_normalize(vec3(axis)), reference, grid, body_index)
        .with_fd_step(fd_step);
    Ok(Sweep {
        inner: observables::sweep(&scene.inner, &spec, &quad).map_err(err)?,
    })
}

/// Dispersion coefficient C₆ (eV·μm⁶) for two sphere inclusions.
#[pyfunction]
#[pyo3(signature = (alpha1, alpha2, cutoff_ev=None))]
fn london_c6(alpha1: &Inclusion, alpha2: &Inclusion, cutoff_ev: Option<f64>) -> PyResult<f64> {
    oracle::london_c6(&alpha1.inner, &alpha2.inner, cutoff_ev).map_err(err)
}

/// Retarded two-particle asymptote −23ħc α₁α₂/(4π r⁷), eV.
#[pyfunction]
fn casimir_polder_u(alpha1_um3: f64, alpha2_um3: f64, r_um: f64) -> f64 {
    oracle::casimir_polder_u(alpha1_um3, alpha2_um3, r_um)
}

/// Closed-form two-dipole log-determinant difference.
#[pyfunction]
fn two_dipole_delta_logdet(
    alpha1: &Inclusion,
    alpha2: &Inclusion,
    r_um: f64,
    mode: &str,
    xi_ev: f64,
) -> PyResult<f64> {
    let cfg = oracle::TwoDipoleConfig {
        alpha1: alpha1.inner.clone(),
        alpha2: alpha2.inner.clone(),
        r_um,
        mode: parse_mode(mode)?,
    };
    oracle::two_dipole_delta_logdet(&cfg, xi_ev).map_err(err)
}

/// Dipole interaction tensor (3×3, μm⁻³) for a separation vector and
/// wavenumber κ (μm⁻¹, 0 = static).
#[pyfunction]
fn dipole_tensor(r_um: [f64; 3], kappa_um_inv: f64) -> PyResult<Vec<Vec<f64>>> {
    let t = casimir_core::coupling::dipole_tensor(&vec3(r_um), kappa_um_inv).map_err(err)?;
    Ok((0..3)
        .map(|i| (0..3).map(|j| t[(i, j)]).collect())
        .collect())
}

#[pymodule]
fn casimir_py(py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HBAR_C_EV_UM", casimir_core::HBAR_C_EV_UM)?;
    m.add("SolverError", py.get_type::<SolverError>())?;
    m.add_class::<Material>()?;
    m.add_class::<Inclusion>()?;
    m.add_class::<Body>()?;
    m.add_class::<Scene>()?;
    m.add_class::<Preset>()?;
    m.add_class::<Sweep>()?;
    m.add_function(wrap_pyfunction!(preset, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(interaction_energy, m)?)?;
    m.add_function(wrap_pyfunction!(delta_logdet, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_separation, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_angle, m)?)?;
    m.add_function(wrap_pyfunction!(london_c6, m)?)?;
    m.add_function(wrap_pyfunction!(casimir_polder_u, m)?)?;
    m.add_function(wrap_pyfunction!(two_dipole_delta_logdet, m)?)?;
    m.add_function(wrap_pyfunction!(dipole_tensor, m)?)?;
    Ok(())
}
