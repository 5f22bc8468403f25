//! Internal units: eV, Å, fs, amu, K.

/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV_PER_K: f64 = 8.617333262e-5;

/// Converts a force/mass ratio in eV/(Å·amu) into an acceleration in Å/fs².
pub const ACCEL_EV_PER_ANG_AMU_TO_ANG_PER_FS2: f64 = 9.648_533_212e-3;

/// Kinetic energy of 1 amu·Å²/fs² expressed in eV.
pub const AMU_ANG2_PER_FS2_TO_EV: f64 = 1.0 / ACCEL_EV_PER_ANG_AMU_TO_ANG_PER_FS2;

pub const EV_TO_MEV: f64 = 1000.0;

/// Standard atomic mass (amu) for the elements the toolkit is likely to meet.
pub fn atomic_mass(symbol: &str) -> Option<f64> {
    let m = match symbol {
        "H" => 1.008,
        "He" => 4.0026,
        "Li" => 6.94,
        "B" => 10.81,
        "C" => 12.011,
        "N" => 14.007,
        "O" => 15.999,
        "F" => 18.998,
        "Ne" => 20.180,
        "Na" => 22.990,
        "Mg" => 24.305,
        "Al" => 26.982,
        "Si" => 28.085,
        "P" => 30.974,
        "S" => 32.06,
        "Cl" => 35.45,
        "Ar" => 39.948,
        "K" => 39.098,
        "Ca" => 40.078,
        "Fe" => 55.845,
        "Ni" => 58.693,
        "Cu" => 63.546,
        "Zn" => 65.38,
        "Kr" => 83.798,
        "Ag" => 107.87,
        "Xe" => 131.29,
        "Pt" => 195.08,
        "Au" => 196.97,
        _ => return None,
    };
    Some(m)
}
