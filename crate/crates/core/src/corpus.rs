//! Dataset handling: manifest ingestion, series-stratified sampling, the
//! parameterization/evaluation split, and synthetic corpus generation.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::ocr::{render_synthetic, NoiseProfile};
use crate::pgm;

/// Document class labels used to scope parameter tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Typology {
    Letter,
    ProcessCover,
    StructuredReport,
    TheatrePlayCover,
    NonStructuredReport,
    Other,
}

impl Typology {
    pub const ALL: [Typology; 6] = [
        Typology::Letter,
        Typology::ProcessCover,
        Typology::StructuredReport,
        Typology::TheatrePlayCover,
        Typology::NonStructuredReport,
        Typology::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Typology::Letter => "letter",
            Typology::ProcessCover => "process-cover",
            Typology::StructuredReport => "structured-report",
            Typology::TheatrePlayCover => "theatre-play-cover",
            Typology::NonStructuredReport => "non-structured-report",
            Typology::Other => "other",
        }
    }
}

impl fmt::Display for Typology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Typology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Typology::ALL.into_iter().find(|t| t.label() == s).ok_or_else(|| {
            let allowed: Vec<_> = Typology::ALL.iter().map(|t| t.label()).collect();
            Error::NotFound(format!(
                "unknown typology `{s}`; allowed values: {}",
                allowed.join(", ")
            ))
        })
    }
}

/// One scanned page with its ground-truth transcription.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub image_path: PathBuf,
    pub transcription_path: PathBuf,
    pub typology: Typology,
    pub series_code: String,
}

/// Parses a tab-separated manifest, one record per line:
/// `id<TAB>image<TAB>transcription<TAB>typology<TAB>series`. Paths are
/// resolved relative to the manifest's directory. All record errors are
/// collected and reported together.
pub fn load_manifest(path: &Path) -> Result<Vec<Document>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut docs = Vec::new();
    let mut errors = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            errors.push(format!("line {lineno}: expected 5 tab-separated fields, got {}", fields.len()));
            continue;
        }
        let id = fields[0].to_string();
        if !seen.insert(id.clone()) {
            errors.push(format!("line {lineno}: duplicate id `{id}`"));
            continue;
        }
        let typology = match fields[3].parse::<Typology>() {
            Ok(t) => t,
            Err(e) => {
                errors.push(format!("line {lineno}: {e}"));
                continue;
            }
        };
        let resolve = |p: &str| {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        let image_path = resolve(fields[1]);
        let transcription_path = resolve(fields[2]);
        for (kind, p) in [("image", &image_path), ("transcription", &transcription_path)] {
            if !p.exists() {
                errors.push(format!("line {lineno}: {kind} file missing: {}", p.display()));
            }
        }
        docs.push(Document {
            id,
            image_path,
            transcription_path,
            typology,
            series_code: fields[4].to_string(),
        });
    }
    if errors.is_empty() {
        Ok(docs)
    } else {
        Err(Error::ManifestLoad(errors))
    }
}

/// Writes a manifest with paths relative to its directory when possible;
/// paths outside that directory are written absolute so the manifest stays
/// loadable from anywhere.
pub fn write_manifest(path: &Path, docs: &[Document]) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new(""));
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for doc in docs {
        let rel = |p: &Path| match p.strip_prefix(base) {
            Ok(stripped) => stripped.to_string_lossy().into_owned(),
            Err(_) => std::fs::canonicalize(p)
                .unwrap_or_else(|_| p.to_path_buf())
                .to_string_lossy()
                .into_owned(),
        };
        writeln!(
            w,
            "{}\t{}\t{}\t{}\t{}",
            doc.id,
            rel(&doc.image_path),
            rel(&doc.transcription_path),
            doc.typology,
            doc.series_code
        )
        .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

const MIN_PER_TYPOLOGY: usize = 60;
const SERIES_FRACTION: f64 = 0.05;

/// Per typology, draws `ceil(5%)` of each archival series uniformly at
/// random, then, while the typology total is below 60, keeps drawing one
/// more document per series round-robin until 60 or the population runs out.
pub fn sample_by_series(docs: &[Document], rng: &mut impl Rng) -> Vec<Document> {
    // deterministic grouping: typology, then series code, then id
    let mut groups: BTreeMap<Typology, BTreeMap<String, Vec<&Document>>> = BTreeMap::new();
    for doc in docs {
        groups
            .entry(doc.typology)
            .or_default()
            .entry(doc.series_code.clone())
            .or_default()
            .push(doc);
    }
    let mut sampled = Vec::new();
    for (_typology, series_map) in groups {
        let mut pools: Vec<Vec<&Document>> = Vec::new();
        let mut taken: Vec<Vec<&Document>> = Vec::new();
        for (_code, mut members) in series_map {
            members.sort_by(|a, b| a.id.cmp(&b.id));
            members.shuffle(rng);
            let quota = ((members.len() as f64) * SERIES_FRACTION).ceil() as usize;
            let rest = members.split_off(quota.min(members.len()));
            taken.push(members);
            pools.push(rest);
        }
        let mut total: usize = taken.iter().map(Vec::len).sum();
        let available: usize = total + pools.iter().map(Vec::len).sum::<usize>();
        let target = MIN_PER_TYPOLOGY.min(available);
        'topup: while total < target {
            let mut drew = false;
            for (pool, keep) in pools.iter_mut().zip(taken.iter_mut()) {
                if let Some(doc) = pool.pop() {
                    keep.push(doc);
                    total += 1;
                    drew = true;
                    if total == target {
                        break 'topup;
                    }
                }
            }
            if !drew {
                break;
            }
        }
        for keep in taken {
            sampled.extend(keep.into_iter().cloned());
        }
    }
    sampled
}

/// The two disjoint halves of a stratified random split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub parameterization: Vec<Document>,
    pub evaluation: Vec<Document>,
}

/// Splits the sample per typology into equal random halves; odd counts give
/// the extra document to the parameterization side.
pub fn split_halves(sample: &[Document], rng: &mut impl Rng) -> SplitResult {
    let mut groups: BTreeMap<Typology, Vec<&Document>> = BTreeMap::new();
    for doc in sample {
        groups.entry(doc.typology).or_default().push(doc);
    }
    let mut result = SplitResult { parameterization: Vec::new(), evaluation: Vec::new() };
    for (typology, mut members) in groups {
        members.sort_by(|a, b| a.id.cmp(&b.id));
        members.shuffle(rng);
        if members.len() == 1 {
            log::warn!("typology {typology} has a single document; evaluation half is empty");
        }
        let half = members.len().div_ceil(2);
        for (i, doc) in members.into_iter().enumerate() {
            if i < half {
                result.parameterization.push(doc.clone());
            } else {
                result.evaluation.push(doc.clone());
            }
        }
    }
    result
}

/// Seeded vocabulary for synthetic transcriptions; restricted to the glyph
/// font's character set.
const WORDS: &[&str] = &[
    "RELATÓRIO", "PROCESSO", "CARTA", "TEATRO", "CENSURA", "LISBOA", "ARQUIVO", "SÉRIE",
    "CÓDIGO", "PÁGINA", "DOCUMENTO", "SESSÃO", "NÚMERO", "ÍNDICE", "CAPA", "PEÇA",
    "MINISTÉRIO", "SECRETARIADO", "NACIONAL", "PUBLICAÇÃO", "REGISTO", "LIVRO", "AUTOR",
    "PARECER", "PROIBIDO", "APROVADO", "CÂMARA", "DIRECÇÃO", "SERVIÇO", "INFORMAÇÃO",
    "1953", "3089", "N.º", "ANO", "REF/12", "TOMO-4", "ACTA", "ENVIADO", "ÀS", "DATA:",
];

/// Bundle describing one synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub count: usize,
    /// typology -> proportion; must sum to 1 within 1e-9.
    pub mix: BTreeMap<Typology, f64>,
    pub noise: NoiseProfile,
    pub seed: u64,
}

/// Renders `count` documents (P5 image + UTF-8 transcription) under `dir`,
/// writes a manifest and a provenance file, and returns the documents.
/// Deterministic per spec contents.
pub fn generate_synthetic(dir: &Path, spec: &SynthSpec) -> Result<Vec<Document>> {
    let total: f64 = spec.mix.values().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "typology proportions must sum to 1, got {total}"
        )));
    }
    if spec.count == 0 {
        return Err(Error::InvalidParameter("count must be >= 1".into()));
    }
    spec.noise.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    // largest-remainder apportionment of count over the mix
    let mut quotas: Vec<(Typology, f64)> =
        spec.mix.iter().map(|(&t, &p)| (t, p * spec.count as f64)).collect();
    let mut counts: Vec<(Typology, usize)> =
        quotas.iter().map(|&(t, q)| (t, q.floor() as usize)).collect();
    let mut assigned: usize = counts.iter().map(|&(_, c)| c).sum();
    quotas.sort_by(|a, b| {
        let fa = a.1 - a.1.floor();
        let fb = b.1 - b.1.floor();
        fb.partial_cmp(&fa).unwrap().then_with(|| a.0.cmp(&b.0))
    });
    let mut qi = 0;
    while assigned < spec.count {
        let t = quotas[qi % quotas.len()].0;
        counts.iter_mut().find(|(ct, _)| *ct == t).unwrap().1 += 1;
        assigned += 1;
        qi += 1;
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let mut docs = Vec::with_capacity(spec.count);
    let mut index = 0usize;
    for (typology, n) in counts {
        for _ in 0..n {
            let id = format!("syn-{index:04}");
            let lines = rng.gen_range(2..=4);
            let text = (0..lines)
                .map(|_| {
                    let words = rng.gen_range(2..=5);
                    (0..words)
                        .map(|_| *WORDS.choose(&mut rng).unwrap())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect::<Vec<_>>()
                .join("\n");
            let doc_seed = spec.seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(index as u64);
            let raster = render_synthetic(&text, &spec.noise, doc_seed)?;
            let image_path = dir.join(format!("{id}.pgm"));
            let transcription_path = dir.join(format!("{id}.gt.txt"));
            pgm::write_p5(&image_path, &raster)?;
            std::fs::write(&transcription_path, &text)
                .map_err(|e| Error::io(&transcription_path, e))?;
            docs.push(Document {
                id,
                image_path,
                transcription_path,
                typology,
                series_code: format!("SYN/{}", typology.label()),
            });
            index += 1;
        }
    }

    let manifest = dir.join("manifest.tsv");
    write_manifest(&manifest, &docs)?;
    let provenance = dir.join("provenance.txt");
    let mix_line = spec
        .mix
        .iter()
        .map(|(t, p)| format!("{t}={p}"))
        .collect::<Vec<_>>()
        .join(" ");
    std::fs::write(
        &provenance,
        format!(
            "seed={}\ncount={}\nmix: {mix_line}\nsalt_pepper_p={}\ncontrast_scale={}\nbackground={}\n",
            spec.seed, spec.count, spec.noise.salt_pepper_p, spec.noise.contrast_scale,
            spec.noise.background
        ),
    )
    .map_err(|e| Error::io(&provenance, e))?;
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fake_doc(id: &str, typology: Typology, series: &str) -> Document {
        Document {
            id: id.into(),
            image_path: PathBuf::from("/dev/null"),
            transcription_path: PathBuf::from("/dev/null"),
            typology,
            series_code: series.into(),
        }
    }

    fn population(typology: Typology, series: &str, n: usize) -> Vec<Document> {
        (0..n).map(|i| fake_doc(&format!("{series}-{i:05}"), typology, series)).collect()
    }

    #[test]
    fn five_percent_of_large_series_needs_no_topup() {
        let docs = population(Typology::Letter, "S/1", 2000);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sample = sample_by_series(&docs, &mut rng);
        assert_eq!(sample.len(), 100);
    }

    #[test]
    fn small_typology_tops_up_to_sixty() {
        let docs = population(Typology::TheatrePlayCover, "S/2", 165);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sample = sample_by_series(&docs, &mut rng);
        // ceil(165 * 0.05) = 9, topped up to 60
        assert_eq!(sample.len(), 60);
    }

    #[test]
    fn topup_caps_at_population() {
        let docs = population(Typology::ProcessCover, "S/3", 40);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sample = sample_by_series(&docs, &mut rng);
        assert_eq!(sample.len(), 40);
    }

    #[test]
    fn sample_size_is_min_of_sixty_and_population_exhaustively() {
        // single-series populations small enough that the 5% quota stays
        // below the 60-document floor
        for n in 1..=200usize {
            let docs = population(Typology::Letter, "S", n);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let sample = sample_by_series(&docs, &mut rng);
            assert_eq!(sample.len(), n.min(60), "population {n}");
        }
        // two series split the floor between them
        let mut docs = population(Typology::Letter, "A", 30);
        docs.extend(population(Typology::Letter, "B", 45));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_by_series(&docs, &mut rng).len(), 60);
    }

    #[test]
    fn sampling_is_deterministic_and_duplicate_free() {
        let mut docs = population(Typology::Letter, "A", 80);
        docs.extend(population(Typology::Letter, "B", 7));
        docs.extend(population(Typology::StructuredReport, "C", 30));
        let a = sample_by_series(&docs, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_by_series(&docs, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let mut ids: Vec<_> = a.iter().map(|d| d.id.clone()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), a.len());
    }

    #[test]
    fn split_preserves_per_typology_counts() {
        let mut docs = population(Typology::TheatrePlayCover, "S", 60);
        docs.extend(population(Typology::Letter, "L", 162));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let split = split_halves(&docs, &mut rng);
        let count = |side: &[Document], t: Typology| side.iter().filter(|d| d.typology == t).count();
        assert_eq!(count(&split.parameterization, Typology::TheatrePlayCover), 30);
        assert_eq!(count(&split.evaluation, Typology::TheatrePlayCover), 30);
        assert_eq!(count(&split.parameterization, Typology::Letter), 81);
        assert_eq!(count(&split.evaluation, Typology::Letter), 81);
        // disjoint
        for doc in &split.parameterization {
            assert!(!split.evaluation.contains(doc));
        }
    }

    #[test]
    fn odd_and_single_counts() {
        let docs = population(Typology::Other, "O", 1);
        let split = split_halves(&docs, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(split.parameterization.len(), 1);
        assert_eq!(split.evaluation.len(), 0);
    }

    #[test]
    fn manifest_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            count: 3,
            mix: BTreeMap::from([(Typology::Letter, 1.0)]),
            noise: NoiseProfile::clean(),
            seed: 7,
        };
        let docs = generate_synthetic(dir.path(), &spec).unwrap();
        assert_eq!(docs.len(), 3);
        assert!(docs.iter().all(|d| d.typology == Typology::Letter));
        let loaded = load_manifest(&dir.path().join("manifest.tsv")).unwrap();
        assert_eq!(loaded, docs);

        // append a record with a bad typology and a missing file
        let manifest = dir.path().join("manifest.tsv");
        let mut text = std::fs::read_to_string(&manifest).unwrap();
        text.push_str("bad-1\tmissing.pgm\tmissing.txt\tposter\tS\n");
        text.push_str("syn-0000\tsyn-0000.pgm\tsyn-0000.gt.txt\tletter\tS\n");
        std::fs::write(&manifest, text).unwrap();
        match load_manifest(&manifest) {
            Err(Error::ManifestLoad(errors)) => {
                assert!(errors.iter().any(|e| e.contains("poster") && e.contains("letter")));
                assert!(errors.iter().any(|e| e.contains("duplicate id `syn-0000`")));
            }
            other => panic!("expected itemized errors, got {other:?}"),
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SynthSpec {
            count: 4,
            mix: BTreeMap::from([(Typology::Letter, 0.5), (Typology::ProcessCover, 0.5)]),
            noise: NoiseProfile { salt_pepper_p: 0.1, contrast_scale: 0.9, background: 240 },
            seed: 11,
        };
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let a = generate_synthetic(dir_a.path(), &spec).unwrap();
        let b = generate_synthetic(dir_b.path(), &spec).unwrap();
        for (da, db) in a.iter().zip(&b) {
            assert_eq!(da.id, db.id);
            assert_eq!(da.typology, db.typology);
            assert_eq!(
                std::fs::read(&da.image_path).unwrap(),
                std::fs::read(&db.image_path).unwrap()
            );
            assert_eq!(
                std::fs::read(&da.transcription_path).unwrap(),
                std::fs::read(&db.transcription_path).unwrap()
            );
        }
        assert!(generate_synthetic(
            dir_a.path(),
            &SynthSpec {
                mix: BTreeMap::from([(Typology::Letter, 0.7)]),
                ..spec.clone()
            }
        )
        .is_err());
    }

    #[test]
    fn zero_noise_corpus_reads_perfectly() {
        use crate::ocr::MockEngine;
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            count: 6,
            mix: BTreeMap::from([(Typology::Letter, 1.0)]),
            noise: NoiseProfile::clean(),
            seed: 13,
        };
        let docs = generate_synthetic(dir.path(), &spec).unwrap();
        let engine = MockEngine::new(1);
        for doc in docs {
            let raster = pgm::read_p5(&doc.image_path).unwrap();
            let gt = std::fs::read_to_string(&doc.transcription_path).unwrap();
            assert_eq!(engine.recognize(&raster), gt, "{}", doc.id);
        }
    }
}
