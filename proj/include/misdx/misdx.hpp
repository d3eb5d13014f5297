#pragma once

// Misdiagnosis pattern mining over MEDLINE-format corpora: cue-phrase title
// selection, approximate dictionary matching, pair extraction, CUI
// canonicalization, and the frequency-weighted directed graph.

#include "misdx/byte_source.hpp"
#include "misdx/canonicalizer.hpp"
#include "misdx/concept_matcher.hpp"
#include "misdx/corpus_reader.hpp"
#include "misdx/cue_filter.hpp"
#include "misdx/errors.hpp"
#include "misdx/export_report.hpp"
#include "misdx/graph_builder.hpp"
#include "misdx/pair_extractor.hpp"
#include "misdx/pipeline.hpp"
#include "misdx/text.hpp"
#include "misdx/umls_client.hpp"
#include "misdx/xml_scanner.hpp"
