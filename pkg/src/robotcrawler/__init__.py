"""Robot crawler process on finite connected graphs."""

from .crawler import (CrawlTrace, SurplusReport, Weighting, audit_trace, bonato_bound, crawl,
                      crawl_kpartite, jump_numbers, surplus)
from .exact import (ExactStats, exact_stats, exact_stats_kpartite, optimal_weighting_kpartite,
                    worst_weighting_kpartite)
from .graph import (Graph, GraphDiagnostics, PartiteSpec, build_kpartite, diagnostics,
                    dump_edge_list, load_edge_list, sample_gnp)
from .theory import (BridgePath, RecordStats, TheoryPrediction, bridge_from_weighting,
                     enumerate_bridge_record_dist, expected_record_bound, predict_er_steps,
                     predict_RC, predict_rc, predict_rcbar, record, record_tail_h,
                     sample_bridge, sample_geom_sum_Y)

__version__ = "0.1.0"
