//! Hierarchical multi-cloud configuration domain.
//!
//! Each provider offers its own Cartesian product of categorical parameters;
//! the set of cluster sizes is shared by all providers. Points are enumerated
//! in canonical order: provider, then parameters in declaration order (first
//! parameter varies slowest), then node count.

use std::fmt;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

const RESERVED: &[char] = &['/', ';', '='];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub values: Vec<String>,
}

impl Param {
    pub fn new<S: Into<String>>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderSpace {
    name: String,
    params: Vec<Param>,
}

impl ProviderSpace {
    pub fn new(name: impl Into<String>, params: Vec<Param>) -> Result<Self> {
        let name = name.into();
        check_token(&name, "provider name")?;
        if params.is_empty() {
            return Err(Error::Domain(format!("provider `{name}` has no parameters")));
        }
        for (i, p) in params.iter().enumerate() {
            check_token(&p.name, "parameter name")?;
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Domain(format!(
                    "provider `{name}`: duplicate parameter `{}`",
                    p.name
                )));
            }
            if p.values.is_empty() {
                return Err(Error::Domain(format!(
                    "provider `{name}`: parameter `{}` has no values",
                    p.name
                )));
            }
            for (j, v) in p.values.iter().enumerate() {
                check_token(v, "parameter value")?;
                if p.values[..j].contains(v) {
                    return Err(Error::Domain(format!(
                        "provider `{name}`: parameter `{}` repeats value `{v}`",
                        p.name
                    )));
                }
            }
        }
        Ok(Self { name, params })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    /// Number of parameter assignments (node count excluded).
    pub fn config_count(&self) -> usize {
        self.params.iter().map(|p| p.values.len()).product()
    }

    /// One-hot width of this provider's parameter blocks.
    pub fn one_hot_width(&self) -> usize {
        self.params.iter().map(|p| p.values.len()).sum()
    }

    /// Mixed-radix rank of an assignment, first parameter most significant.
    fn config_rank(&self, assignment: &[usize]) -> usize {
        self.params
            .iter()
            .zip(assignment)
            .fold(0, |acc, (p, &v)| acc * p.values.len() + v)
    }

    fn config_unrank(&self, mut rank: usize) -> Vec<usize> {
        let mut out = vec![0; self.params.len()];
        for (slot, p) in out.iter_mut().zip(&self.params).rev() {
            *slot = rank % p.values.len();
            rank /= p.values.len();
        }
        out
    }
}

fn check_token(s: &str, what: &str) -> Result<()> {
    if s.is_empty() {
        return Err(Error::Domain(format!("empty {what}")));
    }
    if s.contains(RESERVED) || s.trim() != s {
        return Err(Error::Domain(format!(
            "{what} `{s}` contains a reserved character or surrounding whitespace"
        )));
    }
    Ok(())
}

/// One candidate deployment: provider index, cluster size, and one value index
/// per parameter of that provider.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigPoint {
    pub provider: usize,
    pub nodes: u32,
    pub assignment: Vec<usize>,
}

impl ConfigPoint {
    pub fn new(provider: usize, nodes: u32, assignment: Vec<usize>) -> Self {
        Self {
            provider,
            nodes,
            assignment,
        }
    }
}

/// Real-valued feature vector consumed by surrogate models.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPoint(pub Vec<f64>);

impl Deref for EncodedPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    providers: Vec<ProviderSpace>,
    node_counts: Vec<u32>,
    /// Global index of each provider's first point.
    offsets: Vec<usize>,
}

impl SearchSpace {
    pub fn new(providers: Vec<ProviderSpace>, node_counts: Vec<u32>) -> Result<Self> {
        if providers.is_empty() {
            return Err(Error::Domain("search space has no providers".into()));
        }
        for (i, p) in providers.iter().enumerate() {
            if providers[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::Domain(format!("duplicate provider `{}`", p.name)));
            }
        }
        if node_counts.is_empty() {
            return Err(Error::Domain("node_counts is empty".into()));
        }
        if node_counts[0] < 1 || node_counts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "node_counts must be >= 1 and strictly increasing, got {node_counts:?}"
            )));
        }
        let mut offsets = Vec::with_capacity(providers.len());
        let mut acc = 0;
        for p in &providers {
            offsets.push(acc);
            acc += p.config_count() * node_counts.len();
        }
        Ok(Self {
            providers,
            node_counts,
            offsets,
        })
    }

    /// The three-provider space used in the reference benchmark:
    /// 24 + 16 + 48 = 88 points.
    pub fn reference() -> Self {
        let providers = vec![
            ProviderSpace::new(
                "aws",
                vec![
                    Param::new("family", ["m4", "r4", "c4"]),
                    Param::new("size", ["large", "xlarge"]),
                ],
            ),
            ProviderSpace::new(
                "azure",
                vec![
                    Param::new("family", ["D_v2", "D_v3"]),
                    Param::new("cpu_size", ["2", "4"]),
                ],
            ),
            ProviderSpace::new(
                "gcp",
                vec![
                    Param::new("family", ["e2", "n1"]),
                    Param::new("type", ["standard", "highmem", "highcpu"]),
                    Param::new("vcpu", ["2", "4"]),
                ],
            ),
        ]
        .into_iter()
        .collect::<Result<Vec<_>>>()
        .expect("reference providers are valid");
        Self::new(providers, vec![2, 3, 4, 5]).expect("reference space is valid")
    }

    pub fn providers(&self) -> &[ProviderSpace] {
        &self.providers
    }

    pub fn provider(&self, k: usize) -> Result<&ProviderSpace> {
        self.providers.get(k).ok_or_else(|| {
            Error::Domain(format!(
                "provider index {k} out of range (K = {})",
                self.providers.len()
            ))
        })
    }

    pub fn provider_index(&self, name: &str) -> Option<usize> {
        self.providers.iter().position(|p| p.name == name)
    }

    pub fn n_providers(&self) -> usize {
        self.providers.len()
    }

    pub fn node_counts(&self) -> &[u32] {
        &self.node_counts
    }

    /// Number of points offered by provider `k`.
    pub fn provider_len(&self, k: usize) -> Result<usize> {
        Ok(self.provider(k)?.config_count() * self.node_counts.len())
    }

    /// Total number of points across all providers.
    pub fn len(&self) -> usize {
        let last = self.providers.len() - 1;
        self.offsets[last] + self.providers[last].config_count() * self.node_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn validate(&self, p: &ConfigPoint) -> Result<()> {
        let prov = self.provider(p.provider)?;
        if !self.node_counts.contains(&p.nodes) {
            return Err(Error::Domain(format!(
                "node count {} not in {:?}",
                p.nodes, self.node_counts
            )));
        }
        if p.assignment.len() != prov.params.len() {
            return Err(Error::Domain(format!(
                "provider `{}` expects {} parameters, got {}",
                prov.name,
                prov.params.len(),
                p.assignment.len()
            )));
        }
        for (param, &v) in prov.params.iter().zip(&p.assignment) {
            if v >= param.values.len() {
                return Err(Error::Domain(format!(
                    "value index {v} out of range for `{}`",
                    param.name
                )));
            }
        }
        Ok(())
    }

    /// Position of `p` in [`enumerate_all`](Self::enumerate_all) order.
    pub fn index_of(&self, p: &ConfigPoint) -> Result<usize> {
        self.validate(p)?;
        let prov = &self.providers[p.provider];
        let node_pos = self
            .node_counts
            .iter()
            .position(|&n| n == p.nodes)
            .expect("validated");
        Ok(self.offsets[p.provider]
            + prov.config_rank(&p.assignment) * self.node_counts.len()
            + node_pos)
    }

    pub fn point_at(&self, index: usize) -> Result<ConfigPoint> {
        if index >= self.len() {
            return Err(Error::Domain(format!(
                "point index {index} out of range ({} points)",
                self.len()
            )));
        }
        let k = self.offsets.partition_point(|&o| o <= index) - 1;
        let local = index - self.offsets[k];
        let nn = self.node_counts.len();
        Ok(ConfigPoint {
            provider: k,
            nodes: self.node_counts[local % nn],
            assignment: self.providers[k].config_unrank(local / nn),
        })
    }

    /// Global index range occupied by provider `k`.
    pub fn provider_range(&self, k: usize) -> Result<std::ops::Range<usize>> {
        let len = self.provider_len(k)?;
        Ok(self.offsets[k]..self.offsets[k] + len)
    }

    pub fn enumerate_provider(&self, k: usize) -> Result<Vec<ConfigPoint>> {
        self.provider_range(k)?
            .map(|i| self.point_at(i))
            .collect()
    }

    pub fn enumerate_all(&self) -> Vec<ConfigPoint> {
        (0..self.len())
            .map(|i| self.point_at(i).expect("index in range"))
            .collect()
    }

    fn node_feature(&self, nodes: u32) -> f64 {
        let lo = self.node_counts[0];
        let hi = *self.node_counts.last().expect("non-empty");
        if lo == hi {
            0.5
        } else {
            f64::from(nodes - lo) / f64::from(hi - lo)
        }
    }

    /// One-hot block per parameter of the point's provider, then the scaled
    /// node count.
    pub fn encode(&self, p: &ConfigPoint) -> Result<EncodedPoint> {
        self.validate(p)?;
        let prov = &self.providers[p.provider];
        let mut v = Vec::with_capacity(prov.one_hot_width() + 1);
        push_one_hot(&mut v, prov, &p.assignment);
        v.push(self.node_feature(p.nodes));
        Ok(EncodedPoint(v))
    }

    /// Encoding over the flattened cross-provider domain: a provider one-hot
    /// block, every provider's parameter blocks (zero for inactive
    /// providers), then the scaled node count.
    pub fn encode_flat(&self, p: &ConfigPoint) -> Result<EncodedPoint> {
        self.validate(p)?;
        let width = self.providers.len()
            + self.providers.iter().map(|q| q.one_hot_width()).sum::<usize>()
            + 1;
        let mut v = Vec::with_capacity(width);
        v.extend((0..self.providers.len()).map(|k| if k == p.provider { 1.0 } else { 0.0 }));
        for (k, prov) in self.providers.iter().enumerate() {
            if k == p.provider {
                push_one_hot(&mut v, prov, &p.assignment);
            } else {
                v.extend(std::iter::repeat_n(0.0, prov.one_hot_width()));
            }
        }
        v.push(self.node_feature(p.nodes));
        Ok(EncodedPoint(v))
    }

    /// Middle segment of the canonical point string: `k1=v1;k2=v2`.
    pub fn config_string(&self, p: &ConfigPoint) -> Result<String> {
        self.validate(p)?;
        let prov = &self.providers[p.provider];
        Ok(prov
            .params
            .iter()
            .zip(&p.assignment)
            .map(|(param, &v)| format!("{}={}", param.name, param.values[v]))
            .collect::<Vec<_>>()
            .join(";"))
    }

    /// Canonical point string `<provider>/<k1>=<v1>;<k2>=<v2>/n=<nodes>`.
    pub fn point_string(&self, p: &ConfigPoint) -> Result<String> {
        let cfg = self.config_string(p)?;
        Ok(format!(
            "{}/{}/n={}",
            self.providers[p.provider].name, cfg, p.nodes
        ))
    }

    /// Parses a `k1=v1;k2=v2` segment for provider `k`. Parameters must
    /// appear in declaration order.
    pub fn parse_config(&self, k: usize, config: &str) -> Result<Vec<usize>> {
        let prov = self.provider(k)?;
        let parts: Vec<&str> = config.split(';').collect();
        if parts.len() != prov.params.len() {
            return Err(Error::Domain(format!(
                "config `{config}` has {} parameters, provider `{}` expects {}",
                parts.len(),
                prov.name,
                prov.params.len()
            )));
        }
        parts
            .iter()
            .zip(&prov.params)
            .map(|(part, param)| {
                let (key, value) = part.split_once('=').ok_or_else(|| {
                    Error::Parse(format!("config segment `{part}` lacks `=`"))
                })?;
                if key != param.name {
                    return Err(Error::Domain(format!(
                        "expected parameter `{}`, found `{key}`",
                        param.name
                    )));
                }
                param.values.iter().position(|v| v == value).ok_or_else(|| {
                    Error::Domain(format!(
                        "value `{value}` not offered for `{}` on `{}`",
                        param.name, prov.name
                    ))
                })
            })
            .collect()
    }

    pub fn parse_point(&self, s: &str) -> Result<ConfigPoint> {
        let mut it = s.splitn(3, '/');
        let (Some(name), Some(cfg), Some(nodes)) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Parse(format!("malformed point string `{s}`")));
        };
        let k = self
            .provider_index(name)
            .ok_or_else(|| Error::Domain(format!("unknown provider `{name}`")))?;
        let n: u32 = nodes
            .strip_prefix("n=")
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| Error::Parse(format!("malformed node segment in `{s}`")))?;
        let p = ConfigPoint::new(k, n, self.parse_config(k, cfg)?);
        self.validate(&p)?;
        Ok(p)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: SpaceDoc = serde_json::from_str(s)?;
        let providers = doc
            .providers
            .into_iter()
            .map(|p| {
                let params = p
                    .params
                    .into_iter()
                    .map(|(name, values)| {
                        let Value::Array(values) = values else {
                            return Err(Error::Parse(format!(
                                "parameter `{name}` must map to an array"
                            )));
                        };
                        let values = values
                            .into_iter()
                            .map(|v| match v {
                                Value::String(s) => Ok(s),
                                Value::Number(n) => Ok(n.to_string()),
                                Value::Bool(b) => Ok(b.to_string()),
                                other => Err(Error::Parse(format!(
                                    "unsupported value {other} for `{name}`"
                                ))),
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Param { name, values })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ProviderSpace::new(p.name, params)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(providers, doc.nodes)
    }

    pub fn to_json_string(&self) -> String {
        let doc = SpaceDoc {
            providers: self
                .providers
                .iter()
                .map(|p| ProviderDoc {
                    name: p.name.clone(),
                    params: p
                        .params
                        .iter()
                        .map(|q| {
                            let vals = q.values.iter().cloned().map(Value::String).collect();
                            (q.name.clone(), Value::Array(vals))
                        })
                        .collect(),
                })
                .collect(),
            nodes: self.node_counts.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("space document serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json_str(&text)
    }
}

fn push_one_hot(v: &mut Vec<f64>, prov: &ProviderSpace, assignment: &[usize]) {
    for (param, &a) in prov.params.iter().zip(assignment) {
        v.extend((0..param.values.len()).map(|i| if i == a { 1.0 } else { 0.0 }));
    }
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    providers: Vec<ProviderDoc>,
    nodes: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct ProviderDoc {
    name: String,
    params: Map<String, Value>,
}

impl fmt::Display for SearchSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.providers {
            write!(f, "{}(", p.name)?;
            for (i, q) in p.params.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}: {}", q.name, q.values.join("|"))?;
            }
            f.write_str(") ")?;
        }
        write!(f, "nodes {:?}", self.node_counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn azure_like(nodes: Vec<u32>) -> SearchSpace {
        SearchSpace::new(
            vec![ProviderSpace::new(
                "azure",
                vec![
                    Param::new("family", ["D_v2", "D_v3"]),
                    Param::new("cpu_size", ["2", "4"]),
                ],
            )
            .unwrap()],
            nodes,
        )
        .unwrap()
    }

    #[test]
    fn reference_provider_sizes() {
        let s = SearchSpace::reference();
        assert_eq!(s.enumerate_provider(0).unwrap().len(), 24);
        assert_eq!(s.enumerate_provider(1).unwrap().len(), 16);
        assert_eq!(s.enumerate_provider(2).unwrap().len(), 48);
        assert_eq!(s.enumerate_all().len(), 88);
        assert_eq!(s.len(), 88);
    }

    #[test]
    fn singleton_provider() {
        let s = SearchSpace::new(
            vec![ProviderSpace::new("solo", vec![Param::new("t", ["x"])]).unwrap()],
            vec![2],
        )
        .unwrap();
        assert_eq!(s.enumerate_provider(0).unwrap().len(), 1);
        assert_eq!(s.enumerate_all(), s.enumerate_provider(0).unwrap());
    }

    #[test]
    fn two_providers_concatenate_in_order() {
        let prov = |n: &str| ProviderSpace::new(n, vec![Param::new("t", ["a", "b"])]).unwrap();
        let s = SearchSpace::new(vec![prov("p0"), prov("p1")], vec![1, 2]).unwrap();
        let all = s.enumerate_all();
        assert_eq!(all.len(), 8);
        assert!(all[..4].iter().all(|p| p.provider == 0));
        assert!(all[4..].iter().all(|p| p.provider == 1));
    }

    #[test]
    fn canonical_order_is_lexicographic() {
        let s = azure_like(vec![2, 3]);
        let strs: Vec<String> = s
            .enumerate_all()
            .iter()
            .map(|p| s.point_string(p).unwrap())
            .collect();
        assert_eq!(strs[0], "azure/family=D_v2;cpu_size=2/n=2");
        assert_eq!(strs[1], "azure/family=D_v2;cpu_size=2/n=3");
        assert_eq!(strs[2], "azure/family=D_v2;cpu_size=4/n=2");
        assert_eq!(strs[7], "azure/family=D_v3;cpu_size=4/n=3");
    }

    #[test]
    fn invalid_provider_index() {
        let s = SearchSpace::reference();
        assert!(matches!(s.enumerate_provider(3), Err(Error::Domain(_))));
    }

    #[test]
    fn encode_one_hot_and_nodes() {
        let s = azure_like(vec![2, 3, 4, 5]);
        let p = ConfigPoint::new(0, 2, vec![0, 0]);
        assert_eq!(s.encode(&p).unwrap().0, vec![1.0, 0.0, 1.0, 0.0, 0.0]);
        let top = ConfigPoint::new(0, 5, vec![1, 1]);
        assert_eq!(s.encode(&top).unwrap().0, vec![0.0, 1.0, 0.0, 1.0, 1.0]);
        let single = azure_like(vec![4]);
        let p = ConfigPoint::new(0, 4, vec![0, 1]);
        assert_eq!(*s_last(&single.encode(&p).unwrap()), 0.5);
    }

    fn s_last(e: &EncodedPoint) -> &f64 {
        e.last().unwrap()
    }

    #[test]
    fn encode_rejects_invalid_point() {
        let s = azure_like(vec![2, 3]);
        assert!(s.encode(&ConfigPoint::new(0, 7, vec![0, 0])).is_err());
        assert!(s.encode(&ConfigPoint::new(0, 2, vec![0])).is_err());
        assert!(s.encode(&ConfigPoint::new(0, 2, vec![0, 2])).is_err());
        assert!(s.encode(&ConfigPoint::new(1, 2, vec![0, 0])).is_err());
    }

    #[test]
    fn flat_encoding_layout() {
        let s = SearchSpace::reference();
        let p = s.point_at(24).unwrap(); // first azure point
        let e = s.encode_flat(&p).unwrap();
        assert_eq!(e.len(), 3 + 5 + 4 + 7 + 1);
        assert_eq!(&e[..3], &[0.0, 1.0, 0.0]);
        assert!(e[3..8].iter().all(|&x| x == 0.0));
        assert_eq!(&e[8..12], &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_malformed_spaces() {
        let p = || ProviderSpace::new("a", vec![Param::new("t", ["x"])]).unwrap();
        assert!(SearchSpace::new(vec![], vec![1]).is_err());
        assert!(SearchSpace::new(vec![p(), p()], vec![1]).is_err());
        assert!(SearchSpace::new(vec![p()], vec![]).is_err());
        assert!(SearchSpace::new(vec![p()], vec![0, 1]).is_err());
        assert!(SearchSpace::new(vec![p()], vec![3, 2]).is_err());
        assert!(ProviderSpace::new("a", vec![]).is_err());
        assert!(ProviderSpace::new("a", vec![Param::new("t", Vec::<String>::new())]).is_err());
        assert!(ProviderSpace::new("a", vec![Param::new("t", ["x", "x"])]).is_err());
        assert!(ProviderSpace::new("a/b", vec![Param::new("t", ["x"])]).is_err());
        assert!(
            ProviderSpace::new("a", vec![Param::new("t", ["x"]), Param::new("t", ["y"])]).is_err()
        );
    }

    #[test]
    fn json_document_order_is_parameter_order() {
        let doc = r#"{"providers":[{"name":"azure","params":{"family":["D_v2","D_v3"],"cpu_size":[2,4]}}],"nodes":[2,3,4,5]}"#;
        let s = SearchSpace::from_json_str(doc).unwrap();
        assert_eq!(s, azure_like(vec![2, 3, 4, 5]));
        let back = SearchSpace::from_json_str(&s.to_json_string()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_point_errors() {
        let s = SearchSpace::reference();
        assert!(s.parse_point("aws/family=m4;size=large").is_err());
        assert!(s.parse_point("oracle/family=m4;size=large/n=2").is_err());
        assert!(s.parse_point("aws/size=large;family=m4/n=2").is_err());
        assert!(s.parse_point("aws/family=m4;size=large/n=9").is_err());
        assert!(s.parse_point("aws/family=m4;size=huge/n=2").is_err());
    }

    fn arb_space() -> impl Strategy<Value = SearchSpace> {
        let provider = prop::collection::vec(1usize..4, 1..4);
        (
            prop::collection::vec(provider, 1..4),
            prop::collection::btree_set(1u32..10, 1..5),
        )
            .prop_map(|(provs, nodes)| {
                let providers = provs
                    .iter()
                    .enumerate()
                    .map(|(k, sizes)| {
                        let params = sizes
                            .iter()
                            .enumerate()
                            .map(|(i, &n)| {
                                Param::new(format!("p{i}"), (0..n).map(|v| format!("v{v}")))
                            })
                            .collect();
                        ProviderSpace::new(format!("cloud{k}"), params).unwrap()
                    })
                    .collect();
                SearchSpace::new(providers, nodes.into_iter().collect()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn enumeration_properties(s in arb_space()) {
            let all = s.enumerate_all();
            let mut total = 0;
            for k in 0..s.n_providers() {
                let pts = s.enumerate_provider(k).unwrap();
                let expected = s.node_counts().len() * s.providers()[k].config_count();
                prop_assert_eq!(pts.len(), expected);
                total += expected;
                let enc: HashSet<Vec<u64>> = pts
                    .iter()
                    .map(|p| s.encode(p).unwrap().iter().map(|x| x.to_bits()).collect())
                    .collect();
                prop_assert_eq!(enc.len(), pts.len());
            }
            prop_assert_eq!(all.len(), total);
            let unique: HashSet<_> = all.iter().collect();
            prop_assert_eq!(unique.len(), all.len());
            prop_assert_eq!(&all, &s.enumerate_all());
            for (i, p) in all.iter().enumerate() {
                prop_assert_eq!(s.index_of(p).unwrap(), i);
                let text = s.point_string(p).unwrap();
                let back = s.parse_point(&text).unwrap();
                prop_assert_eq!(&back, p);
                prop_assert_eq!(s.point_string(&back).unwrap(), text);
                let e = s.encode(p).unwrap();
                prop_assert!(e.iter().all(|&x| (0.0..=1.0).contains(&x)));
            }
        }
    }
}
