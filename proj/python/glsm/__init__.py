# Copyright 2026 The GLSM Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""CTR toolkit with graph retrieval over behavior histories."""

from ._glsm import (
    BehaviorEvent,
    BehaviorSequence,
    FormatError,
    GeneratorConfig,
    GlsmError,
    InvalidArgument,
    ItemGraph,
    MissingArtifact,
    NotFound,
    auc,
    build_global_graph,
    build_local_graph,
    experiment_names,
    gauc,
    group_by_user,
    kmeans,
    logloss,
    parse_events,
    run_experiment,
    run_stage,
    select_cluster_count,
    synthesize,
)

__all__ = [name for name in dir() if not name.startswith("_")]
