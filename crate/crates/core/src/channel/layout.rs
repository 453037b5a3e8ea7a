use thiserror::Error;

/// Position in um.
pub type Vec3 = [f64; 3];

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid layout: {}", .0.join("; "))]
pub struct LayoutError(pub Vec<String>);

/// Geometric constraints a layout must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutLimits {
    /// Sensor radius `a`.
    pub sensor_radius: f64,
    /// Fusion-center radius `b`.
    pub fc_radius: f64,
    /// Minimum center-to-center distance between sensors.
    pub min_spacing: f64,
}

impl LayoutLimits {
    /// Spacing defaults to twice the sensor radius.
    pub fn new(sensor_radius: f64, fc_radius: f64) -> Self {
        LayoutLimits {
            sensor_radius,
            fc_radius,
            min_spacing: 2.0 * sensor_radius,
        }
    }

    /// Problems with a sensor placed at `x` given the sensors already placed.
    pub fn sensor_problems(&self, x: &Vec3, placed: &[Vec3], fc: &Vec3) -> Vec<String> {
        let mut out = Vec::new();
        let df = distance(x, fc);
        if df <= self.fc_radius + self.sensor_radius {
            out.push(format!(
                "sensor at {x:?} overlaps the fusion center ({df} um)"
            ));
        }
        for (j, y) in placed.iter().enumerate() {
            let d = distance(x, y);
            if d < self.min_spacing {
                out.push(format!("sensor at {x:?} is {d} um from sensor {j}"));
            }
        }
        out
    }
}

/// Target, sensors and fusion center, with the link distances precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkLayout {
    pub target: Vec3,
    pub sensors: Vec<Vec3>,
    pub fc: Vec3,
    pub limits: LayoutLimits,
    /// `||x_T - x_k||`
    pub target_dist: Vec<f64>,
    /// `||x_k - x_F||`
    pub fc_dist: Vec<f64>,
}

impl NetworkLayout {
    pub fn new(
        target: Vec3,
        sensors: Vec<Vec3>,
        fc: Vec3,
        limits: LayoutLimits,
    ) -> Result<Self, LayoutError> {
        let mut problems = Vec::new();
        if sensors.is_empty() {
            problems.push("at least one sensor is required".to_string());
        }
        for (k, x) in sensors.iter().enumerate() {
            for p in limits.sensor_problems(x, &sensors[..k], &fc) {
                problems.push(format!("sensor {k}: {p}"));
            }
        }
        problems.extend(target_problems(&target, &sensors, &limits));
        if !problems.is_empty() {
            return Err(LayoutError(problems));
        }
        let target_dist = sensors.iter().map(|x| distance(&target, x)).collect();
        let fc_dist = sensors.iter().map(|x| distance(x, &fc)).collect();
        Ok(NetworkLayout {
            target,
            sensors,
            fc,
            limits,
            target_dist,
            fc_dist,
        })
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    /// Same sensors, different target position.
    pub fn with_target(&self, target: Vec3) -> Result<Self, LayoutError> {
        let problems = target_problems(&target, &self.sensors, &self.limits);
        if !problems.is_empty() {
            return Err(LayoutError(problems));
        }
        Ok(NetworkLayout {
            target,
            target_dist: self.target_distances(&target),
            ..self.clone()
        })
    }

    pub fn target_distances(&self, x: &Vec3) -> Vec<f64> {
        self.sensors.iter().map(|s| distance(x, s)).collect()
    }

    /// The first `k` sensors.
    pub fn prefix(&self, k: usize) -> NetworkLayout {
        NetworkLayout {
            sensors: self.sensors[..k].to_vec(),
            target_dist: self.target_dist[..k].to_vec(),
            fc_dist: self.fc_dist[..k].to_vec(),
            ..self.clone()
        }
    }
}

fn target_problems(target: &Vec3, sensors: &[Vec3], limits: &LayoutLimits) -> Vec<String> {
    sensors
        .iter()
        .enumerate()
        .filter(|(_, x)| distance(target, x) <= limits.sensor_radius)
        .map(|(k, _)| format!("target {target:?} lies inside sensor {k}"))
        .collect()
}
