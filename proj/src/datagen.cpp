#include "relus/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "relus/rng.hpp"

namespace relus {

namespace {

Vec draw_vector(std::size_t d, Dist dist, Rng& rng) {
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i)
        x[i] = (dist == Dist::gaussian) ? rng.gaussian() : rng.uniform(-1.0, 1.0);
    return x;
}

}  // namespace

std::pair<Dataset, Dataset> gen_separable_split(const GenSpec& spec, std::size_t n_test) {
    if (spec.d < 1 || spec.n < 1) throw std::invalid_argument("gen_separable: d >= 1, n >= 1");
    Rng rng(spec.seed);
    const Vec hidden = draw_vector(spec.d, spec.dist, rng);

    auto draw_labeled = [&](std::size_t count, std::vector<Sample>& out) {
        std::size_t attempts = 0;
        while (out.size() < count) {
            if (++attempts > 1000000 + count)
                throw std::runtime_error("gen_separable: too many degenerate draws");
            Vec x = draw_vector(spec.d, spec.dist, rng);
            const double m = dot(hidden, x);
            if (std::abs(m) < 1e-9) continue;  // would blow up the witness norm
            out.push_back(Sample{std::move(x), m > 0.0 ? 1 : -1});
        }
    };

    Dataset train;
    draw_labeled(spec.n, train.samples);
    Dataset test;
    draw_labeled(n_test, test.samples);

    double min_margin = std::numeric_limits<double>::infinity();
    double max_norm = 0.0;
    for (const Sample& s : train.samples) {
        min_margin = std::min(min_margin, s.y * dot(hidden, s.x));
        max_norm = std::max(max_norm, norm2(s.x));
    }

    // witness/min_margin gives min margin 1; scaling x by 1/max_norm and the
    // witness by max_norm keeps every margin unchanged.
    Vec witness(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i)
        witness[i] = hidden[i] / min_margin * max_norm;
    for (Sample& s : train.samples)
        for (double& c : s.x) c /= max_norm;
    for (Sample& s : test.samples)
        for (double& c : s.x) c /= max_norm;

    train.separator = std::move(witness);
    train.validate();
    return {std::move(train), std::move(test)};
}

Dataset gen_separable(const GenSpec& spec) { return gen_separable_split(spec, 0).first; }

Dataset gen_adversarial(std::size_t d) {
    if (d < 1) throw std::invalid_argument("gen_adversarial: d >= 1");
    Dataset data;
    for (std::size_t i = 0; i < d; ++i) {
        Vec e(d, 0.0);
        e[i] = 1.0;
        data.samples.push_back(Sample{std::move(e), 1});
    }
    data.separator = Vec(d, 1.0);
    data.validate();
    return data;
}

namespace {

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace

RawTable load_csv(const std::string& path, std::size_t label_column,
                  const std::string& positive_label) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw std::runtime_error("load_csv: empty file " + path);

    const std::size_t width = rows.front().size();
    if (label_column >= width) throw std::runtime_error("load_csv: label column out of range");

    // Header heuristic: first row with any non-numeric feature field is a header.
    std::size_t first = 0;
    for (std::size_t c = 0; c < width; ++c) {
        double tmp;
        if (c != label_column && !parse_double(rows[0][c], tmp)) {
            first = 1;
            break;
        }
    }
    if (first == rows.size()) throw std::runtime_error("load_csv: no data rows in " + path);

    std::vector<std::string> raw_labels;
    std::vector<std::string> distinct;
    RawTable table;
    for (std::size_t r = first; r < rows.size(); ++r) {
        if (rows[r].size() != width) throw std::runtime_error("load_csv: ragged row");
        Vec x;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_column) continue;
            double val;
            if (!parse_double(rows[r][c], val))
                throw std::runtime_error("load_csv: non-numeric feature '" + rows[r][c] + "'");
            x.push_back(val);
        }
        const std::string& lab = rows[r][label_column];
        if (std::find(distinct.begin(), distinct.end(), lab) == distinct.end())
            distinct.push_back(lab);
        raw_labels.push_back(lab);
        table.features.push_back(std::move(x));
    }

    if (positive_label.empty()) {
        if (distinct.size() != 2)
            throw std::runtime_error("load_csv: need exactly 2 distinct labels without a relabel rule, got " +
                                     std::to_string(distinct.size()));
        for (const std::string& lab : raw_labels)
            table.labels.push_back(lab == distinct.front() ? 1 : -1);
    } else {
        if (std::find(distinct.begin(), distinct.end(), positive_label) == distinct.end())
            throw std::runtime_error("load_csv: positive label '" + positive_label + "' not found");
        if (distinct.size() < 2)
            throw std::runtime_error("load_csv: only one distinct label value");
        for (const std::string& lab : raw_labels)
            table.labels.push_back(lab == positive_label ? 1 : -1);
    }
    return table;
}

namespace {

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw std::runtime_error("load_idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

RawTable load_idx(const std::string& images_path, const std::string& labels_path,
                  std::pair<int, int> keep, std::pair<int, int> relabel) {
    if ((relabel.first != 1 && relabel.first != -1) || (relabel.second != 1 && relabel.second != -1))
        throw std::invalid_argument("load_idx: relabel values must be +-1");

    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("load_idx: cannot open " + images_path);
    if (read_be_u32(img, images_path) != 0x00000803u)
        throw std::runtime_error("load_idx: bad image magic in " + images_path);
    const std::uint32_t n_img = read_be_u32(img, images_path);
    const std::uint32_t rows = read_be_u32(img, images_path);
    const std::uint32_t cols = read_be_u32(img, images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("load_idx: cannot open " + labels_path);
    if (read_be_u32(lab, labels_path) != 0x00000801u)
        throw std::runtime_error("load_idx: bad label magic in " + labels_path);
    const std::uint32_t n_lab = read_be_u32(lab, labels_path);
    if (n_img != n_lab) throw std::runtime_error("load_idx: image/label count mismatch");

    const std::size_t pixels = std::size_t(rows) * cols;
    std::vector<unsigned char> buf(pixels);
    RawTable table;
    for (std::uint32_t i = 0; i < n_img; ++i) {
        if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
            throw std::runtime_error("load_idx: truncated image payload");
        char lb;
        if (!lab.get(lb)) throw std::runtime_error("load_idx: truncated label payload");
        const int label = static_cast<unsigned char>(lb);
        int mapped;
        if (label == keep.first) mapped = relabel.first;
        else if (label == keep.second) mapped = relabel.second;
        else continue;
        Vec x(pixels);
        for (std::size_t p = 0; p < pixels; ++p) x[p] = static_cast<double>(buf[p]);
        table.features.push_back(std::move(x));
        table.labels.push_back(mapped);
    }
    return table;
}

Dataset finalize(const RawTable& table) {
    if (table.features.empty()) throw std::invalid_argument("finalize: empty table");
    if (table.features.size() != table.labels.size())
        throw std::invalid_argument("finalize: feature/label count mismatch");
    double max_norm = 0.0;
    for (const Vec& x : table.features) max_norm = std::max(max_norm, norm2(x));
    if (max_norm == 0.0) throw std::runtime_error("finalize: all-zero feature matrix");

    Dataset data;
    for (std::size_t i = 0; i < table.features.size(); ++i) {
        Vec x = table.features[i];
        for (double& c : x) c /= max_norm;
        data.samples.push_back(Sample{std::move(x), table.labels[i]});
    }
    data.validate();
    return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    char buf[64];
    for (const Sample& s : data.samples) {
        for (double c : s.x) {
            std::snprintf(buf, sizeof(buf), "%.17g", c);
            out << buf << ',';
        }
        out << s.y << '\n';
    }
}

}  // namespace relus
