//! Closed-world travel dataset and the tool endpoints that query it.
//!
//! All information used for planning enters through [`execute_tool`]. The
//! dataset is six delimited files under one directory:
//!
//! | file                 | columns                                                                 |
//! |----------------------|-------------------------------------------------------------------------|
//! | `flights.csv`        | number,price,dep_time,arr_time,date,origin,dest                         |
//! | `accommodations.csv` | name,price,room_type,house_rules,min_nights,max_occupancy,rating,city   |
//! | `restaurants.csv`    | name,avg_cost,cuisines,rating,city                                      |
//! | `attractions.csv`    | name,address,phone,website,city                                         |
//! | `ground_routes.csv`  | origin,dest,mode,duration_min,distance_km,cost                          |
//! | `cities.csv`         | state,city                                                              |
//!
//! `house_rules` is `&`-joined, `cuisines` is `,`-joined (quoted).

mod notebook;
mod records;
mod tools;

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::path::Path;

use chrono::NaiveDate;
use csv::StringRecord;
use thiserror::Error;

pub use notebook::{Notebook, NotebookEntry};
pub use records::{
    clock_minutes, Allowance, AttractionRec, FlightRec, GroundMode, GroundRouteRec, HouseRule,
    RestaurantRec, RoomType, StayRec,
};
pub(crate) use tools::fold;
pub use tools::{execute_tool, Observation, Payload, Tool, ToolDirective, ToolError};

pub const FLIGHTS_COLUMNS: [&str; 7] = ["number", "price", "dep_time", "arr_time", "date", "origin", "dest"];
pub const STAYS_COLUMNS: [&str; 8] = [
    "name",
    "price",
    "room_type",
    "house_rules",
    "min_nights",
    "max_occupancy",
    "rating",
    "city",
];
pub const RESTAURANTS_COLUMNS: [&str; 5] = ["name", "avg_cost", "cuisines", "rating", "city"];
pub const ATTRACTIONS_COLUMNS: [&str; 5] = ["name", "address", "phone", "website", "city"];
pub const GROUND_COLUMNS: [&str; 6] = ["origin", "dest", "mode", "duration_min", "distance_km", "cost"];
pub const CITIES_COLUMNS: [&str; 2] = ["state", "city"];

/// Dataset files in load order: (file stem, columns).
pub const DATASET_FILES: [(&str, &[&str]); 6] = [
    ("flights", &FLIGHTS_COLUMNS),
    ("accommodations", &STAYS_COLUMNS),
    ("restaurants", &RESTAURANTS_COLUMNS),
    ("attractions", &ATTRACTIONS_COLUMNS),
    ("ground_routes", &GROUND_COLUMNS),
    ("cities", &CITIES_COLUMNS),
];

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("missing dataset file `{0}`")]
    MissingFile(String),
    #[error("schema error in {file} at row {row}, column `{column}`: {reason}")]
    SchemaError {
        file: String,
        row: usize,
        column: String,
        reason: String,
    },
    #[error("{file} row {row}: city `{city}` is not listed in cities.csv")]
    UnknownCity { file: String, row: usize, city: String },
    #[error("duplicate attraction `{name}` in {city} (attractions row {row})")]
    DuplicateAttraction { name: String, city: String, row: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Immutable, indexed travel dataset. Lookups match names case-insensitively
/// and return records verbatim, in load order.
#[derive(Debug, Clone, Default)]
pub struct Sandbox {
    flights: Vec<FlightRec>,
    stays: Vec<StayRec>,
    restaurants: Vec<RestaurantRec>,
    attractions: Vec<AttractionRec>,
    ground_routes: Vec<GroundRouteRec>,
    cities_by_state: Vec<(String, Vec<String>)>,

    flight_index: HashMap<(String, String, NaiveDate), Vec<usize>>,
    stay_index: HashMap<String, Vec<usize>>,
    restaurant_index: HashMap<String, Vec<usize>>,
    attraction_index: HashMap<String, Vec<usize>>,
    ground_index: HashMap<(String, String, GroundMode), Vec<usize>>,
    state_index: HashMap<String, usize>,
}

/// Record counts per dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct DatasetCounts {
    pub flights: usize,
    pub accommodations: usize,
    pub restaurants: usize,
    pub attractions: usize,
    pub ground_routes: usize,
    pub cities: usize,
}

impl Sandbox {
    /// Builds and indexes a sandbox from records. `cities` is a list of
    /// (state, city) rows.
    pub fn from_parts(
        flights: Vec<FlightRec>,
        stays: Vec<StayRec>,
        restaurants: Vec<RestaurantRec>,
        attractions: Vec<AttractionRec>,
        ground_routes: Vec<GroundRouteRec>,
        cities: Vec<(String, String)>,
    ) -> Result<Self, LoadError> {
        let mut sb = Sandbox::default();
        for (state, city) in cities {
            let slot = *sb.state_index.entry(fold(&state)).or_insert_with(|| {
                sb.cities_by_state.push((state.clone(), Vec::new()));
                sb.cities_by_state.len() - 1
            });
            sb.cities_by_state[slot].1.push(city);
        }
        let known: BTreeSet<String> = sb
            .cities_by_state
            .iter()
            .flat_map(|(_, cs)| cs.iter().map(|c| fold(c)))
            .collect();
        let check = |file: &str, row: usize, city: &str| {
            if known.contains(&fold(city)) {
                Ok(())
            } else {
                Err(LoadError::UnknownCity {
                    file: file.to_string(),
                    row,
                    city: city.to_string(),
                })
            }
        };

        for (i, f) in flights.iter().enumerate() {
            check("flights", i + 1, &f.origin)?;
            check("flights", i + 1, &f.dest)?;
            sb.flight_index
                .entry((fold(&f.origin), fold(&f.dest), f.date))
                .or_default()
                .push(i);
        }
        for (i, s) in stays.iter().enumerate() {
            check("accommodations", i + 1, &s.city)?;
            sb.stay_index.entry(fold(&s.city)).or_default().push(i);
        }
        for (i, r) in restaurants.iter().enumerate() {
            check("restaurants", i + 1, &r.city)?;
            sb.restaurant_index.entry(fold(&r.city)).or_default().push(i);
        }
        let mut seen = BTreeSet::new();
        for (i, a) in attractions.iter().enumerate() {
            check("attractions", i + 1, &a.city)?;
            if !seen.insert((fold(&a.name), fold(&a.city))) {
                return Err(LoadError::DuplicateAttraction {
                    name: a.name.clone(),
                    city: a.city.clone(),
                    row: i + 1,
                });
            }
            sb.attraction_index.entry(fold(&a.city)).or_default().push(i);
        }
        for (i, g) in ground_routes.iter().enumerate() {
            check("ground_routes", i + 1, &g.origin)?;
            check("ground_routes", i + 1, &g.dest)?;
            sb.ground_index
                .entry((fold(&g.origin), fold(&g.dest), g.mode))
                .or_default()
                .push(i);
        }
        sb.flights = flights;
        sb.stays = stays;
        sb.restaurants = restaurants;
        sb.attractions = attractions;
        sb.ground_routes = ground_routes;
        Ok(sb)
    }

    pub fn flights_on<'a>(
        &'a self,
        origin: &str,
        dest: &str,
        date: NaiveDate,
    ) -> impl Iterator<Item = &'a FlightRec> + 'a {
        let idx = self.flight_index.get(&(fold(origin), fold(dest), date));
        idx.into_iter().flatten().map(move |&i| &self.flights[i])
    }

    pub fn stays_in<'a>(&'a self, city: &str) -> impl Iterator<Item = &'a StayRec> + 'a {
        let idx = self.stay_index.get(&fold(city));
        idx.into_iter().flatten().map(move |&i| &self.stays[i])
    }

    pub fn restaurants_in<'a>(&'a self, city: &str) -> impl Iterator<Item = &'a RestaurantRec> + 'a {
        let idx = self.restaurant_index.get(&fold(city));
        idx.into_iter().flatten().map(move |&i| &self.restaurants[i])
    }

    pub fn attractions_in<'a>(&'a self, city: &str) -> impl Iterator<Item = &'a AttractionRec> + 'a {
        let idx = self.attraction_index.get(&fold(city));
        idx.into_iter().flatten().map(move |&i| &self.attractions[i])
    }

    pub fn ground_routes<'a>(
        &'a self,
        origin: &str,
        dest: &str,
        mode: GroundMode,
    ) -> impl Iterator<Item = &'a GroundRouteRec> + 'a {
        let idx = self.ground_index.get(&(fold(origin), fold(dest), mode));
        idx.into_iter().flatten().map(move |&i| &self.ground_routes[i])
    }

    pub fn cities_in(&self, state: &str) -> &[String] {
        self.state_index
            .get(&fold(state))
            .map(|&i| self.cities_by_state[i].1.as_slice())
            .unwrap_or(&[])
    }

    pub fn is_state(&self, name: &str) -> bool {
        self.state_index.contains_key(&fold(name))
    }

    pub fn flights(&self) -> &[FlightRec] {
        &self.flights
    }

    pub fn stays(&self) -> &[StayRec] {
        &self.stays
    }

    pub fn restaurants(&self) -> &[RestaurantRec] {
        &self.restaurants
    }

    pub fn attractions(&self) -> &[AttractionRec] {
        &self.attractions
    }

    pub fn ground(&self) -> &[GroundRouteRec] {
        &self.ground_routes
    }

    pub fn cities_by_state(&self) -> &[(String, Vec<String>)] {
        &self.cities_by_state
    }

    pub fn counts(&self) -> DatasetCounts {
        DatasetCounts {
            flights: self.flights.len(),
            accommodations: self.stays.len(),
            restaurants: self.restaurants.len(),
            attractions: self.attractions.len(),
            ground_routes: self.ground_routes.len(),
            cities: self.cities_by_state.iter().map(|(_, c)| c.len()).sum(),
        }
    }
}

/// Loads the six dataset files under `root`.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<Sandbox, LoadError> {
    let root = root.as_ref();
    for (stem, _) in DATASET_FILES {
        if !root.join(format!("{stem}.csv")).is_file() {
            return Err(LoadError::MissingFile(stem.to_string()));
        }
    }
    let flights = read_table(root, "flights", &FLIGHTS_COLUMNS, |r| {
        let f = FlightRec {
            number: r.text(0)?,
            price: r.money(1)?,
            dep_time: r.clock(2)?,
            arr_time: r.clock(3)?,
            date: r.date(4)?,
            origin: r.text(5)?,
            dest: r.text(6)?,
        };
        if f.price <= 0.0 {
            return Err(r.err(1, "price must be positive"));
        }
        if fold(&f.origin) == fold(&f.dest) {
            return Err(r.err(6, "origin and dest must differ"));
        }
        if clock_minutes(&f.arr_time) <= clock_minutes(&f.dep_time) {
            return Err(r.err(3, "arrival must follow departure"));
        }
        Ok(f)
    })?;
    let stays = read_table(root, "accommodations", &STAYS_COLUMNS, |r| {
        let house_rules = r
            .raw(3)
            .split('&')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<HouseRule>().map_err(|e| r.err(3, &e)))
            .collect::<Result<_, _>>()?;
        let s = StayRec {
            name: r.text(0)?,
            price: r.money(1)?,
            room_type: r.raw(2).parse().map_err(|e: String| r.err(2, &e))?,
            house_rules,
            min_nights: r.count(4)?,
            max_occupancy: r.count(5)?,
            rating: r.rating(6)?,
            city: r.text(7)?,
        };
        if s.min_nights < 1 {
            return Err(r.err(4, "min_nights must be at least 1"));
        }
        if s.max_occupancy < 1 {
            return Err(r.err(5, "max_occupancy must be at least 1"));
        }
        Ok(s)
    })?;
    let restaurants = read_table(root, "restaurants", &RESTAURANTS_COLUMNS, |r| {
        let rec = RestaurantRec {
            name: r.text(0)?,
            avg_cost: r.money(1)?,
            cuisines: r
                .raw(2)
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect(),
            rating: r.rating(3)?,
            city: r.text(4)?,
        };
        if rec.avg_cost <= 0.0 {
            return Err(r.err(1, "avg_cost must be positive"));
        }
        Ok(rec)
    })?;
    let attractions = read_table(root, "attractions", &ATTRACTIONS_COLUMNS, |r| {
        Ok(AttractionRec {
            name: r.text(0)?,
            address: r.raw(1).to_string(),
            phone: r.raw(2).to_string(),
            website: r.raw(3).to_string(),
            city: r.text(4)?,
        })
    })?;
    let ground = read_table(root, "ground_routes", &GROUND_COLUMNS, |r| {
        let g = GroundRouteRec {
            origin: r.text(0)?,
            dest: r.text(1)?,
            mode: r.raw(2).parse().map_err(|e: String| r.err(2, &e))?,
            duration_min: r.count(3)?,
            distance_km: r.money(4)?,
            cost: r.money(5)?,
        };
        if g.duration_min == 0 {
            return Err(r.err(3, "duration must be positive"));
        }
        Ok(g)
    })?;
    let cities = read_table(root, "cities", &CITIES_COLUMNS, |r| Ok((r.text(0)?, r.text(1)?)))?;
    Sandbox::from_parts(flights, stays, restaurants, attractions, ground, cities)
}

struct Row<'a> {
    file: &'a str,
    row: usize,
    columns: &'a [&'a str],
    rec: &'a StringRecord,
}

impl Row<'_> {
    fn err(&self, col: usize, reason: &str) -> LoadError {
        LoadError::SchemaError {
            file: self.file.to_string(),
            row: self.row,
            column: self.columns[col].to_string(),
            reason: reason.to_string(),
        }
    }

    fn raw(&self, col: usize) -> &str {
        self.rec.get(col).unwrap_or("").trim()
    }

    fn text(&self, col: usize) -> Result<String, LoadError> {
        match self.raw(col) {
            "" => Err(self.err(col, "empty value")),
            s => Ok(s.to_string()),
        }
    }

    fn money(&self, col: usize) -> Result<f64, LoadError> {
        let v: f64 = self.raw(col).parse().map_err(|_| self.err(col, "not a number"))?;
        if !v.is_finite() || v < 0.0 {
            return Err(self.err(col, "must be a non-negative number"));
        }
        Ok(v)
    }

    fn rating(&self, col: usize) -> Result<f64, LoadError> {
        let v = self.money(col)?;
        if v > 5.0 {
            return Err(self.err(col, "rating must be within 0-5"));
        }
        Ok(v)
    }

    fn count(&self, col: usize) -> Result<u32, LoadError> {
        let raw = self.raw(col);
        // Source tables sometimes carry integral values as "2.0".
        let raw = raw.strip_suffix(".0").unwrap_or(raw);
        raw.parse().map_err(|_| self.err(col, "not a non-negative integer"))
    }

    fn clock(&self, col: usize) -> Result<String, LoadError> {
        let s = self.raw(col);
        clock_minutes(s).ok_or_else(|| self.err(col, "expected HH:MM"))?;
        Ok(s.to_string())
    }

    fn date(&self, col: usize) -> Result<NaiveDate, LoadError> {
        NaiveDate::parse_from_str(self.raw(col), "%Y-%m-%d").map_err(|_| self.err(col, "expected YYYY-MM-DD"))
    }
}

fn read_table<T>(
    root: &Path,
    stem: &str,
    columns: &[&str],
    mut parse: impl FnMut(&Row<'_>) -> Result<T, LoadError>,
) -> Result<Vec<T>, LoadError> {
    let path = root.join(format!("{stem}.csv"));
    let file = File::open(&path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let schema_err = |row: usize, column: &str, reason: String| LoadError::SchemaError {
        file: stem.to_string(),
        row,
        column: column.to_string(),
        reason,
    };
    let headers = reader.headers().map_err(|e| schema_err(0, "header", e.to_string()))?.clone();
    for (i, want) in columns.iter().enumerate() {
        if headers.get(i).map(str::trim) != Some(*want) {
            return Err(schema_err(0, want, format!("expected header `{want}` in position {}", i + 1)));
        }
    }
    if headers.len() != columns.len() {
        return Err(schema_err(0, "header", format!("expected {} columns", columns.len())));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| schema_err(row, "record", e.to_string()))?;
        if rec.len() != columns.len() {
            let column = columns.get(rec.len()).copied().unwrap_or("record");
            return Err(schema_err(row, column, format!("expected {} fields, found {}", columns.len(), rec.len())));
        }
        out.push(parse(&Row {
            file: stem,
            row,
            columns,
            rec: &rec,
        })?);
    }
    Ok(out)
}

/// Writes `sb` in the on-disk dataset layout.
pub fn write_dataset(sb: &Sandbox, root: impl AsRef<Path>) -> Result<(), LoadError> {
    let root = root.as_ref();
    std::fs::create_dir_all(root).map_err(|source| LoadError::Io {
        path: root.display().to_string(),
        source,
    })?;
    let io = |path: &Path, e: csv::Error| LoadError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    };
    let write = |stem: &str, columns: &[&str], rows: Vec<Vec<String>>| -> Result<(), LoadError> {
        let path = root.join(format!("{stem}.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        w.write_record(columns).map_err(|e| io(&path, e))?;
        for r in rows {
            w.write_record(&r).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    write(
        "flights",
        &FLIGHTS_COLUMNS,
        sb.flights
            .iter()
            .map(|f| {
                vec![
                    f.number.clone(),
                    num(f.price),
                    f.dep_time.clone(),
                    f.arr_time.clone(),
                    f.date.to_string(),
                    f.origin.clone(),
                    f.dest.clone(),
                ]
            })
            .collect(),
    )?;
    write(
        "accommodations",
        &STAYS_COLUMNS,
        sb.stays
            .iter()
            .map(|s| {
                vec![
                    s.name.clone(),
                    num(s.price),
                    s.room_type.to_string(),
                    s.house_rules.iter().map(|h| h.as_str()).collect::<Vec<_>>().join("&"),
                    s.min_nights.to_string(),
                    s.max_occupancy.to_string(),
                    num(s.rating),
                    s.city.clone(),
                ]
            })
            .collect(),
    )?;
    write(
        "restaurants",
        &RESTAURANTS_COLUMNS,
        sb.restaurants
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    num(r.avg_cost),
                    r.cuisines.iter().cloned().collect::<Vec<_>>().join(", "),
                    num(r.rating),
                    r.city.clone(),
                ]
            })
            .collect(),
    )?;
    write(
        "attractions",
        &ATTRACTIONS_COLUMNS,
        sb.attractions
            .iter()
            .map(|a| vec![a.name.clone(), a.address.clone(), a.phone.clone(), a.website.clone(), a.city.clone()])
            .collect(),
    )?;
    write(
        "ground_routes",
        &GROUND_COLUMNS,
        sb.ground_routes
            .iter()
            .map(|g| {
                vec![
                    g.origin.clone(),
                    g.dest.clone(),
                    g.mode.to_string(),
                    g.duration_min.to_string(),
                    num(g.distance_km),
                    num(g.cost),
                ]
            })
            .collect(),
    )?;
    write(
        "cities",
        &CITIES_COLUMNS,
        sb.cities_by_state
            .iter()
            .flat_map(|(s, cs)| cs.iter().map(move |c| vec![s.clone(), c.clone()]))
            .collect(),
    )
}

fn num(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        v.to_string()
    }
}
