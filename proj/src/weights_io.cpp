#include "polyrx/weights_io.hpp"

#include <fstream>

#include <json.hpp>

#include "polyrx/errors.hpp"

namespace polyrx {

using nlohmann::json;

namespace {

json arch_to_json(const RfnetArch& a) {
    return json{{"m", a.m},          {"c", a.conv_filters}, {"f", a.f},
                {"k", a.k},          {"d", a.dense_units},  {"input_w", a.input_w},
                {"input_h", a.input_h}, {"n_classes", a.n_classes}};
}

RfnetArch arch_from_json(const json& j) {
    RfnetArch a;
    a.m = j.at("m").get<int>();
    a.conv_filters = j.at("c").get<std::vector<int>>();
    a.f = j.at("f").get<int>();
    a.k = j.at("k").get<int>();
    a.dense_units = j.at("d").get<std::vector<int>>();
    a.input_w = j.at("input_w").get<int>();
    a.input_h = j.at("input_h").get<int>();
    a.n_classes = j.at("n_classes").get<int>();
    a.validate();
    return a;
}

template <typename T>
void write_array(std::ofstream& f, const std::vector<T>& v) {
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void read_array(std::ifstream& f, std::vector<T>& v, std::size_t n, const std::string& path) {
    v.resize(n);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!f) throw IoError("truncated weight file " + path);
}

struct Shapes {
    std::vector<std::pair<std::size_t, std::size_t>> conv;   // filters, biases
    std::vector<std::pair<std::size_t, std::size_t>> dense;  // weights, biases
};

Shapes layer_shapes(const RfnetArch& a) {
    Shapes s;
    for (int l = 0; l < a.m; ++l) {
        const std::size_t k = static_cast<std::size_t>(a.f) * a.f * a.conv_in_depth(l);
        const std::size_t c = static_cast<std::size_t>(a.conv_filters[l]);
        s.conv.emplace_back(c * k, c);
    }
    std::size_t in_dim = a.flat_size();
    for (int j = 0; j <= a.k; ++j) {
        const std::size_t out = (j == a.k) ? static_cast<std::size_t>(a.n_classes)
                                           : static_cast<std::size_t>(a.dense_units[j]);
        s.dense.emplace_back(out * in_dim, out);
        in_dim = out;
    }
    return s;
}

}  // namespace

void save_model(const RfnetModel& model, const std::string& path) {
    model.arch.validate();
    const bool is_float = model.float_params.has_value();
    if (!is_float && !model.quant_params.has_value())
        throw ParamError("model has no parameters to save");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");

    json header;
    header["format"] = is_float ? "float32" : model.format.name();
    header["arch"] = arch_to_json(model.arch);
    f << header.dump() << '\n';

    if (is_float) {
        for (const auto& cl : model.float_params->conv) {
            write_array(f, cl.filters);
            write_array(f, cl.biases);
        }
        for (const auto& dl : model.float_params->dense) {
            write_array(f, dl.weights);
            write_array(f, dl.biases);
        }
    } else {
        for (const auto& cl : model.quant_params->conv) {
            write_array(f, cl.filters);
            write_array(f, cl.biases);
        }
        for (const auto& dl : model.quant_params->dense) {
            write_array(f, dl.weights);
            write_array(f, dl.biases);
        }
    }
    if (!f) throw IoError("write failed for " + path);
}

RfnetModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw IoError("missing header in " + path);
    const json header = json::parse(line);

    RfnetModel model;
    model.arch = arch_from_json(header.at("arch"));
    const std::string format = header.at("format").get<std::string>();
    const Shapes shapes = layer_shapes(model.arch);

    if (format == "float32") {
        FloatParams p;
        for (const auto& [nf, nb] : shapes.conv) {
            ConvLayer<float> cl;
            read_array(f, cl.filters, nf, path);
            read_array(f, cl.biases, nb, path);
            p.conv.push_back(std::move(cl));
        }
        for (const auto& [nw, nb] : shapes.dense) {
            DenseLayer<float> dl;
            read_array(f, dl.weights, nw, path);
            read_array(f, dl.biases, nb, path);
            p.dense.push_back(std::move(dl));
        }
        model.float_params = std::move(p);
    } else {
        model.format = FixedFormat::parse(format);
        QuantizedParams p;
        for (const auto& [nf, nb] : shapes.conv) {
            ConvLayer<std::int32_t> cl;
            read_array(f, cl.filters, nf, path);
            read_array(f, cl.biases, nb, path);
            p.conv.push_back(std::move(cl));
        }
        for (const auto& [nw, nb] : shapes.dense) {
            DenseLayer<std::int32_t> dl;
            read_array(f, dl.weights, nw, path);
            read_array(f, dl.biases, nb, path);
            p.dense.push_back(std::move(dl));
        }
        model.quant_params = std::move(p);
    }
    return model;
}

}  // namespace polyrx
