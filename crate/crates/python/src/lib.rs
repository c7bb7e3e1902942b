//! Python bindings: build a pipeline from a preset name or config text and
//! augment `H x W x C` float32 arrays in place of file round-trips.

use ::maxent_augment::{AugmentError, ImageTensor, Pipeline, PipelineConfig};
use numpy::{PyArray1, PyArray3, PyArrayMethods, PyReadonlyArray3, PyUntypedArrayMethods};
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: AugmentError) -> PyErr {
    match e {
        AugmentError::UnknownPreset(_) => PyKeyError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A config bound to a root seed. Immutable; safe to share across threads.
#[pyclass(name = "Pipeline", frozen, module = "maxent_augment")]
struct PyPipeline {
    inner: Pipeline,
}

#[pymethods]
impl PyPipeline {
    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// The bound config in config-file form.
    fn config_text(&self) -> String {
        self.inner.config().to_config_string()
    }

    fn augment<'py>(
        &self,
        py: Python<'py>,
        image: PyReadonlyArray3<'py, f32>,
        stream_id: u64,
    ) -> PyResult<Bound<'py, PyArray3<f32>>> {
        augment_impl(py, &self.inner, image, stream_id)
    }

    fn __repr__(&self) -> String {
        format!("Pipeline(seed={})", self.inner.seed())
    }
}

fn augment_impl<'py>(
    py: Python<'py>,
    pipeline: &Pipeline,
    image: PyReadonlyArray3<'py, f32>,
    stream_id: u64,
) -> PyResult<Bound<'py, PyArray3<f32>>> {
    let shape = image.shape();
    let (h, w, c) = (shape[0], shape[1], shape[2]);
    let data = image.as_array().iter().copied().collect::<Vec<f32>>();
    let out = py.detach(|| {
        let x = ImageTensor::new(h, w, c, data)?;
        pipeline
            .augment(stream_id, &x)
            .map(|(img, _)| img.into_data())
    });
    let out = out.map_err(to_py)?;
    PyArray1::from_vec(py, out).reshape([h, w, c])
}

/// `make_pipeline(preset_or_config, seed)`: a preset name (S1, S2, S3,
/// default) or config text with `key = value` lines.
#[pyfunction]
fn make_pipeline(preset_or_config: &str, seed: u64) -> PyResult<PyPipeline> {
    let text = preset_or_config.trim();
    let config = if text.contains('=') {
        PipelineConfig::parse(text)
    } else {
        ::maxent_augment::preset(text)
    }
    .map_err(to_py)?;
    Ok(PyPipeline {
        inner: Pipeline::new(config, seed).map_err(to_py)?,
    })
}

/// `augment_array(pipeline, image, stream_id)`: returns a new array of the same shape.
#[pyfunction]
fn augment_array<'py>(
    py: Python<'py>,
    pipeline: &PyPipeline,
    image: PyReadonlyArray3<'py, f32>,
    stream_id: u64,
) -> PyResult<Bound<'py, PyArray3<f32>>> {
    augment_impl(py, &pipeline.inner, image, stream_id)
}

#[pymodule]
#[pyo3(name = "maxent_augment")]
fn maxent_augment_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPipeline>()?;
    m.add_function(wrap_pyfunction!(make_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(augment_array, m)?)?;
    m.add("PRESET_NAMES", ::maxent_augment::PRESET_NAMES.to_vec())?;
    m.add("__version__", ::maxent_augment::VERSION)?;
    Ok(())
}
