use std::collections::HashMap;

use super::{EnrichmentDataset, Entity, GeoPoint, EARTH_RADIUS_M};

/// Uniform latitude/longitude grid over one dataset's entities.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dataset_id: String,
    kind_iri: String,
    cell_deg: f64,
    entities: Vec<Entity>,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

/// Padding added to the query box so that rounding in the box arithmetic
/// can never drop an entity sitting exactly on the radius.
const BOX_SLACK_DEG: f64 = 1e-7;

/// Indexes `dataset` on a grid of `cell_deg`-sized cells.
pub fn build_index(dataset: &EnrichmentDataset, cell_deg: f64) -> SpatialIndex {
    assert!(
        cell_deg > 0.0 && cell_deg.is_finite(),
        "cell size must be positive"
    );
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, e) in dataset.entities.iter().enumerate() {
        cells
            .entry(cell_of(e.location, cell_deg))
            .or_default()
            .push(i);
    }
    SpatialIndex {
        dataset_id: dataset.dataset_id.clone(),
        kind_iri: dataset.kind_iri.clone(),
        cell_deg,
        entities: dataset.entities.clone(),
        cells,
    }
}

fn cell_of(p: GeoPoint, cell: f64) -> (i64, i64) {
    (
        (p.lat() / cell).floor() as i64,
        (p.lon() / cell).floor() as i64,
    )
}

impl SpatialIndex {
    pub fn dataset_id(&self) -> &str {
        &self.dataset_id
    }

    pub fn kind_iri(&self) -> &str {
        &self.kind_iri
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    /// Entities in every cell meeting the bounding box of the circle of
    /// `radius_m` around `center`; a superset of the entities within range.
    pub fn candidates(&self, center: GeoPoint, radius_m: f64) -> Vec<&Entity> {
        let delta = radius_m / EARTH_RADIUS_M;
        let dlat = delta.to_degrees() + BOX_SLACK_DEG;
        let lat_lo = center.lat() - dlat;
        let lat_hi = center.lat() + dlat;
        let lat_cells = (
            (lat_lo / self.cell_deg).floor() as i64,
            (lat_hi / self.cell_deg).floor() as i64,
        );

        let ratio = delta.sin() / center.lat().to_radians().cos();
        let full_longitude = lat_lo <= -90.0
            || lat_hi >= 90.0
            || delta >= std::f64::consts::FRAC_PI_2
            || ratio >= 1.0;
        let lon_ranges: Vec<(f64, f64)> = if full_longitude {
            vec![(-180.0, 180.0)]
        } else {
            let dlon = ratio.asin().to_degrees() + BOX_SLACK_DEG;
            let (lo, hi) = (center.lon() - dlon, center.lon() + dlon);
            if lo < -180.0 {
                vec![(lo + 360.0, 180.0), (-180.0, hi)]
            } else if hi >= 180.0 {
                vec![(lo, 180.0), (-180.0, hi - 360.0)]
            } else {
                vec![(lo, hi)]
            }
        };
        let lon_cells: Vec<(i64, i64)> = lon_ranges
            .iter()
            .map(|(lo, hi)| {
                (
                    (lo / self.cell_deg).floor() as i64,
                    (hi / self.cell_deg).floor() as i64,
                )
            })
            .collect();

        let in_box = |(la, lo): (i64, i64)| {
            la >= lat_cells.0
                && la <= lat_cells.1
                && lon_cells.iter().any(|(a, b)| lo >= *a && lo <= *b)
        };
        let box_cells: i128 = (lat_cells.1 - lat_cells.0 + 1) as i128
            * lon_cells
                .iter()
                .map(|(a, b)| (b - a + 1) as i128)
                .sum::<i128>();

        let mut hits: Vec<usize> = Vec::new();
        if box_cells > self.cells.len() as i128 {
            for (cell, members) in &self.cells {
                if in_box(*cell) {
                    hits.extend(members);
                }
            }
        } else {
            for la in lat_cells.0..=lat_cells.1 {
                for (a, b) in &lon_cells {
                    for lo in *a..=*b {
                        if let Some(members) = self.cells.get(&(la, lo)) {
                            hits.extend(members);
                        }
                    }
                }
            }
        }
        hits.sort_unstable();
        hits.dedup();
        hits.into_iter().map(|i| &self.entities[i]).collect()
    }
}
