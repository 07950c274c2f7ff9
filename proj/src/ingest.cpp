#include "genolm/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "genolm/error.hpp"
#include "genolm/parallel.hpp"
#include "genolm/rng.hpp"

namespace genolm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

std::string group_name(const std::optional<TaxonGroup>& g) {
  return g ? std::string(to_string(*g)) : std::string("unknown");
}

// ---- location grammar: a..b | a | complement(L) | join(L,...) | order(L,...)

struct Span {
  std::size_t lo = 0, hi = 0;
  Strand strand = Strand::Plus;
};

class LocationParser {
 public:
  explicit LocationParser(std::string_view text) : text_(text) {}

  Span parse() {
    Span s = location();
    if (pos_ != text_.size()) fail("trailing characters");
    return s;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::MalformedLocation, "'" + std::string(text_) + "': " + why);
  }

  bool consume(std::string_view word) {
    if (text_.substr(pos_, word.size()) == word) {
      pos_ += word.size();
      return true;
    }
    return false;
  }

  std::size_t number() {
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (begin == pos_) {
      if (pos_ < text_.size() && (text_[pos_] == '<' || text_[pos_] == '>')) fail("fuzzy ends are not supported");
      fail("expected a coordinate");
    }
    return std::stoull(std::string(text_.substr(begin, pos_ - begin)));
  }

  Span location() {
    if (consume("complement(")) {
      Span inner = location();
      if (!consume(")")) fail("unbalanced parenthesis");
      inner.strand = inner.strand == Strand::Plus ? Strand::Minus : Strand::Plus;
      return inner;
    }
    if (consume("join(") || consume("order(")) {
      Span acc = location();
      while (consume(",")) {
        const Span next = location();
        if (next.strand != acc.strand) fail("mixed strands inside join");
        acc.lo = std::min(acc.lo, next.lo);
        acc.hi = std::max(acc.hi, next.hi);
      }
      if (!consume(")")) fail("unbalanced parenthesis");
      return acc;
    }
    Span s;
    s.lo = number();
    s.hi = s.lo;
    if (consume("..")) s.hi = number();
    if (s.lo == 0 || s.hi < s.lo) fail("coordinates must satisfy 1 <= start <= end");
    return s;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

struct RawFeature {
  std::string key;
  std::string location;
  std::size_t line = 0;
  std::map<std::string, std::string> qualifiers;
};

std::string strip_quotes(std::string v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  return v;
}

std::optional<FeatureType> product_type(std::string_view key) {
  if (key == "CDS") return FeatureType::CDS;
  if (key == "tRNA") return FeatureType::TRNA;
  if (key == "rRNA") return FeatureType::RRNA;
  if (key == "ncRNA") return FeatureType::NcRNA;
  if (key == "misc_RNA") return FeatureType::MiscRNA;
  return std::nullopt;
}

GenbankEntry finish_entry(const std::string& locus, std::vector<RawFeature>& features,
                          const std::string& origin, bool saw_origin, const std::string& lineage,
                          std::optional<TaxonGroup> taxon, std::size_t locus_line) {
  if (!saw_origin) throw Error(ErrorCode::MissingOrigin, "record '" + locus + "' (line " + std::to_string(locus_line) + ")");
  GenbankEntry entry;
  entry.sequence = NucleotideSequence::validate(origin, locus);
  entry.taxon_group = taxon ? taxon : taxon_from_lineage(lineage);

  struct Product {
    FeatureType type;
    Span span;
    std::string tag;
  };
  std::vector<Product> products;
  std::vector<std::pair<const RawFeature*, Span>> genes;
  for (const auto& f : features) {
    const bool is_gene = f.key == "gene";
    const auto ptype = product_type(f.key);
    if (!is_gene && !ptype) continue;
    Span span;
    try {
      span = LocationParser(f.location).parse();
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedLocation, "line " + std::to_string(f.line) + ": " + e.what());
    }
    if (span.hi > entry.sequence.size()) {
      throw Error(ErrorCode::MalformedLocation, "line " + std::to_string(f.line) + ": end " +
                                                    std::to_string(span.hi) + " past sequence length " +
                                                    std::to_string(entry.sequence.size()));
    }
    std::string tag;
    if (auto it = f.qualifiers.find("locus_tag"); it != f.qualifiers.end()) tag = it->second;
    else if (auto g = f.qualifiers.find("gene"); g != f.qualifiers.end()) tag = g->second;
    if (is_gene) genes.emplace_back(&f, span);
    else products.push_back({*ptype, span, tag});
  }

  for (const auto& [f, span] : genes) {
    AnnotationRecord rec;
    rec.seq_id = locus;
    rec.start = span.lo;
    rec.end = span.hi;
    rec.strand = span.strand;
    rec.taxon_group = entry.taxon_group;
    if (auto it = f->qualifiers.find("locus_tag"); it != f->qualifiers.end()) rec.name = it->second;
    else if (auto g = f->qualifiers.find("gene"); g != f->qualifiers.end()) rec.name = g->second;

    if (f->qualifiers.contains("pseudo") || f->qualifiers.contains("pseudogene")) {
      rec.feature_type = FeatureType::Pseudo;
    } else {
      const Product* match = nullptr;
      for (const auto& p : products) {
        if (!rec.name.empty() && p.tag == rec.name) {
          match = &p;
          break;
        }
      }
      if (!match && rec.name.empty()) {
        for (const auto& p : products) {
          if (p.span.strand == span.strand && p.span.lo >= span.lo && p.span.hi <= span.hi) {
            match = &p;
            break;
          }
        }
      }
      rec.feature_type = match ? match->type : FeatureType::Gene;
    }
    entry.genes.push_back(std::move(rec));
  }
  return entry;
}

}  // namespace

std::string_view to_string(Strand s) noexcept { return s == Strand::Plus ? "+" : "-"; }

std::string_view to_string(FeatureType f) noexcept {
  switch (f) {
    case FeatureType::CDS: return "CDS";
    case FeatureType::Pseudo: return "pseudo";
    case FeatureType::TRNA: return "tRNA";
    case FeatureType::RRNA: return "rRNA";
    case FeatureType::NcRNA: return "ncRNA";
    case FeatureType::MiscRNA: return "miscRNA";
    case FeatureType::Gene: return "gene";
  }
  return "gene";
}

std::string_view to_string(TaxonGroup t) noexcept {
  switch (t) {
    case TaxonGroup::Protozoa: return "protozoa";
    case TaxonGroup::Fungi: return "fungi";
    case TaxonGroup::Plant: return "plant";
    case TaxonGroup::Invertebrate: return "invertebrate";
    case TaxonGroup::Mammalian: return "mammalian";
    case TaxonGroup::VertebrateOther: return "vertebrate_other";
  }
  return "protozoa";
}

std::optional<FeatureType> parse_feature_type(std::string_view text) noexcept {
  if (text == "misc_RNA") return FeatureType::MiscRNA;
  for (const auto f : {FeatureType::CDS, FeatureType::Pseudo, FeatureType::TRNA, FeatureType::RRNA,
                       FeatureType::NcRNA, FeatureType::MiscRNA, FeatureType::Gene}) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

std::optional<TaxonGroup> parse_taxon_group(std::string_view text) noexcept {
  for (const auto t : kTaxonGroups) {
    if (text == to_string(t)) return t;
  }
  return std::nullopt;
}

std::optional<TaxonGroup> taxon_from_lineage(std::string_view lineage) noexcept {
  auto has = [&](std::string_view word) { return lineage.find(word) != std::string_view::npos; };
  if (!has("Eukaryota")) return std::nullopt;
  if (has("Mammalia")) return TaxonGroup::Mammalian;
  if (has("Vertebrata")) return TaxonGroup::VertebrateOther;
  if (has("Metazoa")) return TaxonGroup::Invertebrate;
  if (has("Viridiplantae")) return TaxonGroup::Plant;
  if (has("Fungi")) return TaxonGroup::Fungi;
  return TaxonGroup::Protozoa;
}

std::pair<std::pair<std::size_t, std::size_t>, Strand> parse_location(std::string_view text) {
  std::string compact;
  for (const char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) compact.push_back(c);
  }
  const Span s = LocationParser(compact).parse();
  return {{s.lo, s.hi}, s.strand};
}

std::vector<GenbankEntry> parse_genbank(std::istream& in, std::optional<TaxonGroup> taxon) {
  enum class Section { None, Header, Features, Origin };
  std::vector<GenbankEntry> entries;
  Section section = Section::None;
  std::string locus, origin, lineage;
  std::size_t locus_line = 0;
  bool saw_origin = false, in_lineage = false;
  std::vector<RawFeature> features;
  bool in_location = false;
  std::string* open_qualifier = nullptr;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view v(line);
    if (starts_with(v, "LOCUS")) {
      std::istringstream ls(line.substr(5));
      ls >> locus;
      locus_line = line_no;
      origin.clear();
      lineage.clear();
      features.clear();
      saw_origin = false;
      section = Section::Header;
      continue;
    }
    if (starts_with(v, "//")) {
      if (section != Section::None) {
        entries.push_back(finish_entry(locus, features, origin, saw_origin, lineage, taxon, locus_line));
      }
      section = Section::None;
      continue;
    }
    if (section == Section::None) continue;

    if (starts_with(v, "FEATURES")) {
      section = Section::Features;
      continue;
    }
    if (starts_with(v, "ORIGIN")) {
      section = Section::Origin;
      saw_origin = true;
      continue;
    }
    if (!v.empty() && !std::isspace(static_cast<unsigned char>(v[0])) && section != Section::Origin) {
      // any other top-level keyword ends the features table
      section = Section::Header;
      in_lineage = false;
    }

    switch (section) {
      case Section::Header: {
        if (starts_with(v, "  ORGANISM")) {
          in_lineage = true;
        } else if (in_lineage && v.size() > 12 && v.substr(0, 12) == std::string(12, ' ')) {
          lineage += std::string(trim(v));
        } else if (!v.empty() && v[0] != ' ') {
          in_lineage = false;
        } else if (starts_with(v, "  ") && !starts_with(v, "            ")) {
          in_lineage = false;
        }
        break;
      }
      case Section::Features: {
        if (v.size() > 5 && v.substr(0, 5) == "     " && v[5] != ' ') {
          RawFeature f;
          const std::string_view rest = v.substr(5);
          const auto sp = rest.find(' ');
          f.key = std::string(rest.substr(0, sp));
          f.location = sp == std::string_view::npos ? "" : std::string(trim(rest.substr(sp)));
          f.line = line_no;
          features.push_back(std::move(f));
          in_location = true;
          open_qualifier = nullptr;
        } else if (!features.empty()) {
          const std::string_view body = trim(v);
          if (body.empty()) break;
          if (body.front() == '/') {
            in_location = false;
            const auto eq = body.find('=');
            const std::string key(body.substr(1, eq == std::string_view::npos ? std::string_view::npos : eq - 1));
            std::string value = eq == std::string_view::npos ? std::string() : std::string(body.substr(eq + 1));
            auto& slot = features.back().qualifiers[key];
            slot = value;
            open_qualifier = (!value.empty() && value.front() == '"' &&
                              (value.size() == 1 || value.back() != '"'))
                                 ? &slot
                                 : nullptr;
            if (!open_qualifier) slot = strip_quotes(slot);
          } else if (in_location) {
            features.back().location += std::string(body);
          } else if (open_qualifier) {
            *open_qualifier += " " + std::string(body);
            if (body.back() == '"') {
              *open_qualifier = strip_quotes(*open_qualifier);
              open_qualifier = nullptr;
            }
          }
        }
        break;
      }
      case Section::Origin: {
        for (const char c : v) {
          if (std::isalpha(static_cast<unsigned char>(c))) origin.push_back(c);
        }
        break;
      }
      case Section::None: break;
    }
  }
  if (section != Section::None) {
    entries.push_back(finish_entry(locus, features, origin, saw_origin, lineage, taxon, locus_line));
  }
  return entries;
}

std::vector<AnnotationRecord> parse_genbank_genes(std::istream& in) {
  std::vector<AnnotationRecord> out;
  for (auto& e : parse_genbank(in)) {
    for (auto& g : e.genes) out.push_back(std::move(g));
  }
  return out;
}

std::vector<AnnotationRecord> parse_bed_like(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::BadRow, "line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, '\t');) cols.push_back(c);
    if (cols.size() < 5 || cols.size() > 6) throw bad("expected 5 or 6 tab-separated columns");
    AnnotationRecord r;
    r.seq_id = cols[0];
    if (r.seq_id.empty()) throw bad("empty seq_id");
    std::size_t b0 = 0, e0 = 0;
    try {
      std::size_t used = 0;
      b0 = std::stoull(cols[1], &used);
      if (used != cols[1].size() || cols[1][0] == '-') throw std::invalid_argument("start");
      e0 = std::stoull(cols[2], &used);
      if (used != cols[2].size() || cols[2][0] == '-') throw std::invalid_argument("end");
    } catch (const std::logic_error&) {
      throw bad("start/end must be non-negative integers");
    }
    if (e0 <= b0) throw bad("end must exceed start");
    r.start = b0 + 1;
    r.end = e0;
    if (cols[3] == "+") r.strand = Strand::Plus;
    else if (cols[3] == "-") r.strand = Strand::Minus;
    else throw bad("strand must be + or -");
    const auto ft = parse_feature_type(cols[4]);
    if (!ft) throw bad("unknown feature_type '" + cols[4] + "'");
    r.feature_type = *ft;
    if (cols.size() == 6 && !cols[5].empty()) {
      r.taxon_group = parse_taxon_group(cols[5]);
      if (!r.taxon_group) throw bad("unknown taxon_group '" + cols[5] + "'");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FunctionalRegion> extract_functional_regions(const std::vector<NucleotideSequence>& genome,
                                                         const std::vector<AnnotationRecord>& annotations,
                                                         const ExtractOptions& options) {
  std::unordered_map<std::string, const NucleotideSequence*> by_id;
  for (const auto& s : genome) by_id.emplace(s.id(), &s);
  for (const auto& a : annotations) {
    auto it = by_id.find(a.seq_id);
    if (it == by_id.end()) throw Error(ErrorCode::UnknownSequenceId, "'" + a.seq_id + "'");
    if (a.start < 1 || a.end < a.start || a.end > it->second->size()) {
      throw Error(ErrorCode::InvalidArgument, "annotation " + a.seq_id + ":" + std::to_string(a.start) +
                                                  "-" + std::to_string(a.end) + " outside sequence");
    }
  }

  std::vector<std::vector<FunctionalRegion>> per_record(annotations.size());
  parallel_for(annotations.size(), options.threads, [&](std::size_t i) {
    const AnnotationRecord& a = annotations[i];
    const std::string_view genome_seq = by_id.at(a.seq_id)->view();
    std::vector<FunctionalRegion> pieces;
    std::size_t p = a.start - 1;
    const std::size_t stop = a.end;
    while (p < stop) {
      while (p < stop && genome_seq[p] == 'N') ++p;
      const std::size_t begin = p;
      while (p < stop && genome_seq[p] != 'N') ++p;
      if (p > begin && p - begin >= options.min_length) {
        FunctionalRegion r;
        r.source = a;
        r.source.start = begin + 1;
        r.source.end = p;
        std::string bases(genome_seq.substr(begin, p - begin));
        if (a.strand == Strand::Minus) bases = reverse_complement(bases);
        std::string id = a.seq_id + ":" + std::to_string(r.source.start) + "-" + std::to_string(r.source.end) +
                         "(" + std::string(to_string(a.strand)) + ")";
        r.sequence = NucleotideSequence::trusted(std::move(bases), std::move(id));
        pieces.push_back(std::move(r));
      }
    }
    if (a.strand == Strand::Minus) std::reverse(pieces.begin(), pieces.end());
    per_record[i] = std::move(pieces);
  });

  std::vector<FunctionalRegion> out;
  for (auto& v : per_record) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  return out;
}

void write_corpus_fasta(std::ostream& out, const std::vector<FunctionalRegion>& regions) {
  for (const auto& r : regions) {
    const std::string header = r.sequence.id() + "|" + group_name(r.source.taxon_group) + "|" +
                               std::string(to_string(r.source.feature_type));
    write_fasta_record(out, header, r.sequence.view());
  }
}

// ---------------------------------------------------------------- task datasets

namespace {

std::vector<TaxonGroup> groups_present(const std::vector<AnnotationRecord>& annotations) {
  std::set<TaxonGroup> s;
  for (const auto& a : annotations) {
    if (a.taxon_group) s.insert(*a.taxon_group);
  }
  return {s.begin(), s.end()};
}

// seq_id -> group, taken from the annotations on that sequence.
std::map<std::string, TaxonGroup> sequence_groups(const std::vector<AnnotationRecord>& annotations) {
  std::map<std::string, TaxonGroup> out;
  for (const auto& a : annotations) {
    if (a.taxon_group) out.emplace(a.seq_id, *a.taxon_group);
  }
  return out;
}

struct Interval {
  const NucleotideSequence* seq;
  std::size_t begin, end;  // 0-based half-open
};

}  // namespace

std::vector<LabeledItem> build_gene_classification(const std::vector<FunctionalRegion>& regions,
                                                   const std::vector<NucleotideSequence>& genome,
                                                   const std::vector<AnnotationRecord>& annotations,
                                                   const GeneTaskConfig& config, std::uint64_t seed) {
  if (config.min_length == 0 || config.max_length < config.min_length) {
    throw Error(ErrorCode::InvalidArgument, "need 0 < min_length <= max_length");
  }
  std::vector<AnnotationRecord> labeled;
  for (const auto& r : regions) labeled.push_back(r.source);
  const std::vector<TaxonGroup> groups = config.groups.empty() ? groups_present(labeled) : config.groups;
  const std::vector<FeatureType> types =
      config.types.empty() ? std::vector<FeatureType>(std::begin(kGeneCategories), std::end(kGeneCategories))
                           : config.types;

  std::vector<LabeledItem> items;
  std::uint64_t cell = 0;
  for (const TaxonGroup g : groups) {
    for (const FeatureType t : types) {
      std::vector<const FunctionalRegion*> pool;
      for (const auto& r : regions) {
        const auto len = r.sequence.size();
        if (r.source.taxon_group == g && r.source.feature_type == t && len >= config.min_length &&
            len <= config.max_length) {
          pool.push_back(&r);
        }
      }
      if (pool.size() < config.per_class) {
        throw Error(ErrorCode::InsufficientData, std::string(to_string(g)) + "/" + std::string(to_string(t)) +
                                                     " needed " + std::to_string(config.per_class) +
                                                     " available " + std::to_string(pool.size()));
      }
      std::sort(pool.begin(), pool.end(), [](const FunctionalRegion* a, const FunctionalRegion* b) {
        return std::tie(a->source.seq_id, a->source.start, a->source.end, a->sequence.bases()) <
               std::tie(b->source.seq_id, b->source.start, b->source.end, b->sequence.bases());
      });
      Rng rng = Rng::for_job(seed, cell++);
      rng.shuffle(std::span(pool));
      for (std::size_t i = 0; i < config.per_class; ++i) {
        items.push_back({pool[i]->sequence.bases(), std::string(to_string(t)), std::string(to_string(g))});
      }
    }

    if (!config.include_control) continue;
    // Intergenic intervals at least control_margin away from every annotation.
    std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> blocked;
    std::set<std::string> group_seqs;
    for (const auto& a : annotations) {
      const std::size_t lo = a.start - 1 >= config.control_margin ? a.start - 1 - config.control_margin : 0;
      blocked[a.seq_id].emplace_back(lo, a.end + config.control_margin);
      if (a.taxon_group == g) group_seqs.insert(a.seq_id);
    }
    std::vector<Interval> free;
    for (const auto& s : genome) {
      if (!group_seqs.contains(s.id())) continue;
      auto spans = blocked[s.id()];
      std::sort(spans.begin(), spans.end());
      std::size_t cursor = 0;
      for (const auto& [lo, hi] : spans) {
        if (lo > cursor) free.push_back({&s, cursor, std::min(lo, s.size())});
        cursor = std::max(cursor, hi);
        if (cursor >= s.size()) break;
      }
      if (cursor < s.size()) free.push_back({&s, cursor, s.size()});
    }
    Rng rng = Rng::for_job(seed, 0x10000 + cell++);
    std::size_t got = 0;
    const std::size_t max_attempts = 200 * std::max<std::size_t>(config.per_class, 1);
    for (std::size_t attempt = 0; got < config.per_class && attempt < max_attempts; ++attempt) {
      const std::size_t len = config.min_length + rng.below(config.max_length - config.min_length + 1);
      std::uint64_t total = 0;
      for (const auto& iv : free) total += iv.end - iv.begin >= len ? iv.end - iv.begin - len + 1 : 0;
      if (total == 0) continue;
      std::uint64_t pick = rng.below(total);
      for (const auto& iv : free) {
        const std::uint64_t starts = iv.end - iv.begin >= len ? iv.end - iv.begin - len + 1 : 0;
        if (pick < starts) {
          const std::string_view window = iv.seq->view().substr(iv.begin + pick, len);
          if (window.find('N') == std::string_view::npos) {
            items.push_back({std::string(window), "control", std::string(to_string(g))});
            ++got;
          }
          break;
        }
        pick -= starts;
      }
    }
    if (got < config.per_class) {
      throw Error(ErrorCode::InsufficientData, std::string(to_string(g)) + "/control needed " +
                                                   std::to_string(config.per_class) + " available " +
                                                   std::to_string(got));
    }
  }
  return items;
}

GenerTaskDatasets build_taxonomic_classification(const std::vector<NucleotideSequence>& genome,
                                                 const std::vector<AnnotationRecord>& annotations,
                                                 const TaxonTaskConfig& config, std::uint64_t seed) {
  if (config.window == 0) throw Error(ErrorCode::InvalidArgument, "window must be positive");
  GenerTaskDatasets out;
  const auto seq_group = sequence_groups(annotations);
  const std::vector<TaxonGroup> groups = config.groups.empty() ? groups_present(annotations) : config.groups;
  std::uint64_t job = 0;
  for (const TaxonGroup g : groups) {
    const std::string gname(to_string(g));
    std::vector<const NucleotideSequence*> contigs;
    for (const auto& s : genome) {
      auto it = seq_group.find(s.id());
      if (it == seq_group.end() || it->second != g) continue;
      if (s.size() < config.window) {
        ++out.contigs_too_short;
        ++out.contigs_too_short_by_group[gname];
        continue;
      }
      contigs.push_back(&s);
    }
    std::uint64_t total = 0;
    for (const auto* c : contigs) total += c->size() - config.window + 1;
    if (config.per_group > 0 && total == 0) {
      throw Error(ErrorCode::InsufficientData, gname + " needed " + std::to_string(config.per_group) +
                                                   " available 0 (no contig reaches the window length)");
    }
    Rng rng = Rng::for_job(seed, 0x20000 + job++);
    for (std::size_t i = 0; i < config.per_group; ++i) {
      std::uint64_t pick = rng.below(total);
      for (const auto* c : contigs) {
        const std::uint64_t starts = c->size() - config.window + 1;
        if (pick < starts) {
          out.taxonomic_classification.push_back({std::string(c->view().substr(pick, config.window)), gname, gname});
          break;
        }
        pick -= starts;
      }
    }
  }
  return out;
}

GenerTaskDatasets build_gener_task_datasets(const std::vector<FunctionalRegion>& regions,
                                            const std::vector<NucleotideSequence>& genome,
                                            const std::vector<AnnotationRecord>& annotations,
                                            const GeneTaskConfig& gene_config,
                                            const TaxonTaskConfig& taxon_config, std::uint64_t seed) {
  for (const auto& r : regions) {
    if (!r.source.taxon_group) {
      throw Error(ErrorCode::InvalidArgument, "region " + r.sequence.id() + " lacks a taxon_group");
    }
  }
  GenerTaskDatasets out = build_taxonomic_classification(genome, annotations, taxon_config, seed);
  out.gene_classification = build_gene_classification(regions, genome, annotations, gene_config, seed);
  return out;
}

void write_labeled_tsv(std::ostream& out, const std::vector<LabeledItem>& items) {
  out << "#sequence\tlabel\n";
  for (const auto& it : items) out << it.sequence << '\t' << it.label << '\n';
}

StatsCell CorpusStats::total() const noexcept {
  StatsCell t;
  for (const auto& [key, c] : cells) {
    t.genes += c.genes;
    t.nucleotides += c.nucleotides;
  }
  return t;
}

CorpusStats corpus_stats(const std::vector<FunctionalRegion>& regions) {
  CorpusStats stats;
  for (const auto& r : regions) {
    auto& cell = stats.cells[{group_name(r.source.taxon_group), std::string(to_string(r.source.feature_type))}];
    ++cell.genes;
    cell.nucleotides += r.sequence.size();
  }
  return stats;
}

void write_stats_tsv(std::ostream& out, const CorpusStats& stats) {
  out << "#taxon\tfeature\tgenes\tnucleotides\n";
  for (const auto& [key, c] : stats.cells) {
    out << key.first << '\t' << key.second << '\t' << c.genes << '\t' << c.nucleotides << '\n';
  }
  const StatsCell t = stats.total();
  out << "total\t*\t" << t.genes << '\t' << t.nucleotides << '\n';
}

}  // namespace genolm
