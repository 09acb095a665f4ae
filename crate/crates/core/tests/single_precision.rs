use nls_star::profiles::build_profile;
use nls_star::slope::slope_j;
use nls_star::spectral::{assemble, morse_index};
use nls_star::{GridSpecF32, OperatorKind, ProfileSpecF32, Sector};

#[test]
fn profile_and_slope_in_f32() {
    let spec = ProfileSpecF32::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
    assert!((spec.vertex_value() - 6f32.sqrt()).abs() < 1e-6);
    let phi = build_profile(&spec, &GridSpecF32::new(20.0, 2000).unwrap()).unwrap();
    assert!((phi.vertex().re - 6f32.sqrt()).abs() < 1e-6);
    let r = slope_j::<f32>(3, 1, -1.0, 4.0, 3.0).unwrap();
    assert!((r.j - 1.5).abs() < 1e-5);
}

#[test]
fn morse_index_in_f32() {
    let spec = ProfileSpecF32::attractive(3, 1, -1.0, 4.0, 3.0).unwrap();
    let op = assemble(OperatorKind::L1, &spec, &GridSpecF32::new(20.0, 1000).unwrap(), Sector::Split(1)).unwrap();
    assert_eq!(morse_index(&op).unwrap(), 2);
}
