use pyo3::prelude::*;

#[pymodule]
fn dpm_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
