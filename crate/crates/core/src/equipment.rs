//! Supply conduit catalog and reel drum sizing.

use std::f64::consts::PI;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, FlushError, Result};
use crate::units::{
    bar_to_pa, inches_to_m, pa_to_bar, CUBIC_METERS_PER_CUBIC_INCH, METERS_PER_FOOT,
};

pub const STEEL_DENSITY_KG_M3: f64 = 7850.0;

const BUILTIN_CATALOG: &str = include_str!("../data/catalog.csv");
const BUILTIN_REELS: &str = include_str!("../data/reels.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConduitKind {
    CoiledTubing,
    FlexibleSteelPipe,
}

impl fmt::Display for ConduitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConduitKind::CoiledTubing => "coiled-tubing",
            ConduitKind::FlexibleSteelPipe => "flexible-steel-pipe",
        })
    }
}

impl FromStr for ConduitKind {
    type Err = FlushError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "coiled-tubing" => Ok(ConduitKind::CoiledTubing),
            "flexible-steel-pipe" => Ok(ConduitKind::FlexibleSteelPipe),
            other => Err(FlushError::invalid(
                "kind",
                format!("expected coiled-tubing or flexible-steel-pipe, got {other:?}"),
            )),
        }
    }
}

/// A supply conduit product. Diameters are in inches, as catalogs list them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConduitProduct {
    pub name: String,
    pub internal_diameter_in: f64,
    pub outside_diameter_in: f64,
    /// `None` when the catalog does not state a rating.
    pub max_working_pressure_pa: Option<f64>,
    pub kind: ConduitKind,
    /// Reel K-factor; `None` means derive it from the OD.
    pub k_factor: Option<f64>,
    /// Catalog nominal mass, carried as metadata only.
    pub nominal_mass_kg_m: Option<f64>,
}

impl ConduitProduct {
    pub fn validate(&self) -> Result<()> {
        let field = |f: &str| format!("product {}.{f}", self.name);
        require_positive(&field("id_in"), self.internal_diameter_in)?;
        if !(self.outside_diameter_in > self.internal_diameter_in) {
            return Err(FlushError::invalid(
                field("od_in"),
                format!(
                    "must exceed id_in ({} in), got {}",
                    self.internal_diameter_in, self.outside_diameter_in
                ),
            ));
        }
        if let Some(p) = self.max_working_pressure_pa {
            require_positive(&field("max_wp_bar"), p)?;
        }
        if let Some(k) = self.k_factor {
            require_positive(&field("k_factor"), k)?;
        }
        Ok(())
    }

    /// The stated K-factor, or the square-packing value for this OD.
    pub fn effective_k_factor(&self) -> f64 {
        self.k_factor
            .unwrap_or_else(|| packing_k_factor(self.outside_diameter_in))
    }
}

/// Catalog row as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogRow {
    name: String,
    id_in: f64,
    od_in: f64,
    kind: String,
    max_wp_bar: Option<f64>,
    k_factor: Option<f64>,
    #[serde(default)]
    nominal_mass_kg_m: Option<f64>,
}

/// Parses a catalog CSV with header
/// `name,id_in,od_in,kind,max_wp_bar,k_factor[,nominal_mass_kg_m]`.
/// Empty `max_wp_bar` marks an unrated product, empty `k_factor` derives K
/// from the OD.
pub fn read_catalog<R: Read>(reader: R) -> Result<Vec<ConduitProduct>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut products = Vec::new();
    for row in rdr.deserialize::<CatalogRow>() {
        let row = row.map_err(|source| FlushError::Csv {
            context: "catalog".to_string(),
            source,
        })?;
        let product = ConduitProduct {
            kind: row.kind.parse()?,
            name: row.name,
            internal_diameter_in: row.id_in,
            outside_diameter_in: row.od_in,
            max_working_pressure_pa: row.max_wp_bar.map(bar_to_pa),
            k_factor: row.k_factor,
            nominal_mass_kg_m: row.nominal_mass_kg_m,
        };
        product.validate()?;
        products.push(product);
    }
    Ok(products)
}

pub fn write_catalog<W: std::io::Write>(products: &[ConduitProduct], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let wrap = |source| FlushError::Csv {
        context: "catalog".to_string(),
        source,
    };
    for p in products {
        wtr.serialize(CatalogRow {
            name: p.name.clone(),
            id_in: p.internal_diameter_in,
            od_in: p.outside_diameter_in,
            kind: p.kind.to_string(),
            max_wp_bar: p.max_working_pressure_pa.map(pa_to_bar),
            k_factor: p.k_factor,
            nominal_mass_kg_m: p.nominal_mass_kg_m,
        })
        .map_err(wrap)?;
    }
    wtr.flush()
        .map_err(|e| wrap(csv::Error::from(e)))?;
    Ok(())
}

/// Coiled tubing and flexible steel pipe products shipped with the crate.
pub fn builtin_catalog() -> Vec<ConduitProduct> {
    read_catalog(BUILTIN_CATALOG.as_bytes()).expect("built-in catalog is valid")
}

pub fn find_product<'a>(catalog: &'a [ConduitProduct], name: &str) -> Result<&'a ConduitProduct> {
    catalog
        .iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| FlushError::UnknownProduct(name.to_string()))
}

/// Square-packing reel constant `π/(12·OD²)`: feet of pipe per cubic inch of
/// `(A+C)·A·B` when wraps sit on a square grid of pitch OD.
pub fn packing_k_factor(od_in: f64) -> f64 {
    PI / (12.0 * od_in * od_in)
}

/// Reel drum dimensions in inches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReelSpec {
    /// A
    pub tubing_stack_height_in: f64,
    /// B
    pub drum_width_in: f64,
    /// C
    pub core_diameter_in: f64,
    /// K
    pub k_factor: f64,
}

impl ReelSpec {
    pub fn validate(&self) -> Result<()> {
        require_non_negative("reel.tubing_stack_height_in", self.tubing_stack_height_in)?;
        require_non_negative("reel.drum_width_in", self.drum_width_in)?;
        require_non_negative("reel.core_diameter_in", self.core_diameter_in)?;
        require_non_negative("reel.k_factor", self.k_factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReelCapacity {
    pub feet: f64,
    pub meters: f64,
}

/// `L = (A + C)·A·B·K`, in feet and meters.
pub fn reel_capacity(spec: &ReelSpec) -> ReelCapacity {
    let feet = (spec.tubing_stack_height_in + spec.core_diameter_in)
        * spec.tubing_stack_height_in
        * spec.drum_width_in
        * spec.k_factor;
    ReelCapacity {
        feet,
        meters: feet * METERS_PER_FOOT,
    }
}

/// Envelope volume of the loaded drum, `(π/4)·(C + 2A)²·B`, in m³.
pub fn spool_volume(spec: &ReelSpec) -> f64 {
    let outer = spec.core_diameter_in + 2.0 * spec.tubing_stack_height_in;
    PI / 4.0 * outer * outer * spec.drum_width_in * CUBIC_METERS_PER_CUBIC_INCH
}

/// Mass per meter of the conduit wall, `(π/4)·(OD² − ID²)·ρ`.
pub fn conduit_linear_mass(product: &ConduitProduct, material_density_kg_m3: f64) -> f64 {
    let od = inches_to_m(product.outside_diameter_in);
    let id = inches_to_m(product.internal_diameter_in);
    PI / 4.0 * (od * od - id * id) * material_density_kg_m3
}

/// Drum dimensions without the K-factor, which comes from the product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrumGeometry {
    pub core_diameter_in: f64,
    pub drum_width_in: f64,
    pub stack_height_in: f64,
}

/// Drum assigned to a product, as listed in a reel table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReelAssignment {
    pub product: String,
    pub core_diameter_in: f64,
    pub drum_width_in: f64,
    pub stack_height_in: f64,
}

impl ReelAssignment {
    pub fn drum(&self) -> DrumGeometry {
        DrumGeometry {
            core_diameter_in: self.core_diameter_in,
            drum_width_in: self.drum_width_in,
            stack_height_in: self.stack_height_in,
        }
    }
}

/// Reel drums for the built-in catalog products.
pub fn builtin_reels() -> Vec<ReelAssignment> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(BUILTIN_REELS.as_bytes());
    rdr.deserialize()
        .collect::<std::result::Result<_, _>>()
        .expect("built-in reel table is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReelResult {
    pub product: String,
    pub kind: ConduitKind,
    pub internal_diameter_in: f64,
    pub outside_diameter_in: f64,
    pub k_factor: f64,
    pub core_diameter_in: f64,
    pub drum_width_in: f64,
    pub stack_height_in: f64,
    pub capacity_ft: f64,
    pub capacity_m: f64,
    pub spool_volume_m3: f64,
    pub nominal_mass_kg_m: Option<f64>,
    pub linear_mass_kg_m: f64,
    pub total_mass_t: f64,
}

/// Capacity, envelope and stored mass of `product` wound on `drum`.
pub fn size_reel(
    product: &ConduitProduct,
    drum: &DrumGeometry,
    material_density_kg_m3: f64,
) -> Result<ReelResult> {
    product.validate()?;
    require_positive("material_density_kg_m3", material_density_kg_m3)?;
    let spec = ReelSpec {
        tubing_stack_height_in: drum.stack_height_in,
        drum_width_in: drum.drum_width_in,
        core_diameter_in: drum.core_diameter_in,
        k_factor: product.effective_k_factor(),
    };
    spec.validate()?;
    let capacity = reel_capacity(&spec);
    let linear_mass = conduit_linear_mass(product, material_density_kg_m3);
    Ok(ReelResult {
        product: product.name.clone(),
        kind: product.kind,
        internal_diameter_in: product.internal_diameter_in,
        outside_diameter_in: product.outside_diameter_in,
        k_factor: spec.k_factor,
        core_diameter_in: spec.core_diameter_in,
        drum_width_in: spec.drum_width_in,
        stack_height_in: spec.tubing_stack_height_in,
        capacity_ft: capacity.feet,
        capacity_m: capacity.meters,
        spool_volume_m3: spool_volume(&spec),
        nominal_mass_kg_m: product.nominal_mass_kg_m,
        linear_mass_kg_m: linear_mass,
        total_mass_t: linear_mass * capacity.meters / 1000.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Unrated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Unrated => "unrated",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feasibility {
    pub product: String,
    pub required_pa: f64,
    pub rating_pa: Option<f64>,
    /// Rating minus requirement; negative when the product is overloaded.
    pub margin_pa: Option<f64>,
    pub verdict: Verdict,
}

impl Feasibility {
    pub fn passes(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Checks a required internal pressure against the product's working
/// pressure rating.
pub fn pressure_feasibility(product: &ConduitProduct, required_dp_pa: f64) -> Feasibility {
    let margin = product.max_working_pressure_pa.map(|r| r - required_dp_pa);
    let verdict = match margin {
        None => Verdict::Unrated,
        Some(m) if m >= 0.0 => Verdict::Pass,
        Some(_) => Verdict::Fail,
    };
    Feasibility {
        product: product.name.clone(),
        required_pa: required_dp_pa,
        rating_pa: product.max_working_pressure_pa,
        margin_pa: margin,
        verdict,
    }
}
