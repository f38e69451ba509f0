//! Deterministic generator for the shipped full-scale catalog and the
//! fixtures derived from it.
//!
//! The full catalog has 2,000 metrics in all 17 categories, 350 of them
//! High priority. Its `gpu_ai` category holds a hand-written set of NVIDIA
//! DCGM and vLLM metrics; every other category is enumerated from
//! namespace × subsystem × measure tables.

use super::{generate_keywords, Catalog, Category, KeywordRules, MetricEntry, MetricType, Priority};

pub const FULL_TOTAL: usize = 2000;
pub const FULL_HIGH: usize = 350;
pub const VERSION: &str = "synthetic-k8s-1.29";

use MetricType::{Counter as C, Gauge as G, Histogram as H};
use Priority::{High as HI, Medium as MD};

/// `gpu_ai` entries of the shipped catalog: (name, type, priority, help).
pub const GPU_AI: &[(&str, MetricType, Priority, &str)] = &[
    ("vllm:time_to_first_token_seconds", H, HI, "Histogram of time to first token in seconds."),
    ("vllm:time_per_output_token_seconds", H, HI, "Histogram of time per output token in seconds."),
    ("vllm:inter_token_latency_seconds", H, HI, "Histogram of inter-token latency in seconds."),
    ("vllm:e2e_request_latency_seconds", H, HI, "Histogram of end to end request latency in seconds."),
    ("vllm:request_queue_time_seconds", H, MD, "Histogram of time spent in WAITING phase for request."),
    ("vllm:request_inference_time_seconds", H, MD, "Histogram of time spent in RUNNING phase for request."),
    ("vllm:request_prefill_time_seconds", H, MD, "Histogram of time spent in PREFILL phase for request."),
    ("vllm:request_decode_time_seconds", H, MD, "Histogram of time spent in DECODE phase for request."),
    ("vllm:generation_tokens_total", C, HI, "Number of generation tokens processed."),
    ("vllm:prompt_tokens_total", C, HI, "Number of prefill tokens processed."),
    ("vllm:request_success_total", C, HI, "Count of successfully processed requests."),
    ("vllm:num_requests_running", G, HI, "Number of requests currently running on GPU."),
    ("vllm:num_requests_waiting", G, HI, "Number of requests waiting to be processed."),
    ("vllm:num_preemptions_total", C, MD, "Cumulative number of preemption from the engine."),
    ("vllm:gpu_cache_usage_perc", G, HI, "GPU KV-cache usage. 1 means 100 percent usage."),
    ("vllm:kv_cache_usage_perc", G, HI, "KV-cache usage. 1 means 100 percent usage."),
    ("vllm:cpu_cache_usage_perc", G, MD, "CPU KV-cache usage. 1 means 100 percent usage."),
    ("vllm:gpu_prefix_cache_hit_rate", G, MD, "GPU prefix cache block hit rate."),
    ("vllm:request_prompt_tokens", H, MD, "Number of prefill tokens processed per request."),
    ("vllm:request_generation_tokens", H, MD, "Number of generation tokens processed per request."),
    ("vllm:iteration_tokens_total", H, MD, "Histogram of number of tokens per engine step."),
    ("vllm:request_params_n", H, MD, "Histogram of the n request parameter."),
    ("vllm:request_max_num_generation_tokens", H, MD, "Histogram of maximum number of requested generation tokens."),
    ("vllm:cache_config_info", G, MD, "Information of the LLMEngine CacheConfig."),
    ("vllm:lora_requests_info", G, MD, "Running stats on lora requests."),
    ("DCGM_FI_DEV_GPU_UTIL", G, HI, "GPU utilization (in %)."),
    ("DCGM_FI_DEV_GPU_TEMP", G, HI, "GPU temperature (in C)."),
    ("DCGM_FI_DEV_MEMORY_TEMP", G, MD, "Memory temperature (in C)."),
    ("DCGM_FI_DEV_POWER_USAGE", G, HI, "Power draw (in W)."),
    ("DCGM_FI_DEV_TOTAL_ENERGY_CONSUMPTION", C, MD, "Total energy consumption since boot (in mJ)."),
    ("DCGM_FI_DEV_FB_USED", G, HI, "Framebuffer memory used (in MiB)."),
    ("DCGM_FI_DEV_FB_FREE", G, HI, "Framebuffer memory free (in MiB)."),
    ("DCGM_FI_DEV_MEM_COPY_UTIL", G, HI, "Memory utilization (in %)."),
    ("DCGM_FI_DEV_SM_CLOCK", G, MD, "SM clock frequency (in MHz)."),
    ("DCGM_FI_DEV_MEM_CLOCK", G, MD, "Memory clock frequency (in MHz)."),
    ("DCGM_FI_DEV_ENC_UTIL", G, MD, "Encoder utilization (in %)."),
    ("DCGM_FI_DEV_DEC_UTIL", G, MD, "Decoder utilization (in %)."),
    ("DCGM_FI_DEV_PCIE_REPLAY_COUNTER", C, MD, "Total number of PCIe retries."),
    ("DCGM_FI_DEV_XID_ERRORS", G, HI, "Value of the last XID error encountered."),
    ("DCGM_FI_DEV_NVLINK_BANDWIDTH_TOTAL", C, MD, "Total number of NVLink bandwidth counters for all lanes."),
    ("DCGM_FI_PROF_GR_ENGINE_ACTIVE", G, HI, "Ratio of time the graphics engine is active."),
    ("DCGM_FI_PROF_SM_ACTIVE", G, MD, "The ratio of cycles an SM has at least 1 warp assigned."),
    ("DCGM_FI_PROF_SM_OCCUPANCY", G, MD, "The ratio of number of warps resident on an SM."),
    ("DCGM_FI_PROF_PIPE_TENSOR_ACTIVE", G, HI, "Ratio of cycles the tensor (HMMA) pipe is active."),
    ("DCGM_FI_PROF_DRAM_ACTIVE", G, MD, "Ratio of cycles the device memory interface is active."),
    ("DCGM_FI_PROF_PCIE_TX_BYTES", G, MD, "The rate of data transmitted over the PCIe bus."),
    ("DCGM_FI_PROF_PCIE_RX_BYTES", G, MD, "The rate of data received over the PCIe bus."),
    ("DCGM_FI_DEV_VGPU_LICENSE_STATUS", G, MD, "vGPU License status."),
    ("DCGM_FI_DEV_UNCORRECTABLE_REMAPPED_ROWS", C, MD, "Number of remapped rows for uncorrectable errors."),
    ("DCGM_FI_DEV_CORRECTABLE_REMAPPED_ROWS", C, MD, "Number of remapped rows for correctable errors."),
    ("DCGM_FI_DEV_ROW_REMAP_FAILURE", G, MD, "Whether remapping of rows has failed."),
    ("DCGM_FI_DEV_SLOWDOWN_TEMP", G, MD, "Slowdown temperature threshold (in C)."),
    ("gpu_operator_gpu_nodes_total", G, MD, "Number of nodes with GPUs."),
    ("gpu_operator_reconciliation_status", G, MD, "Status of the last reconciliation of the GPU operator."),
];

/// Per-category enumeration tables: (category, size, high count,
/// namespaces, subsystems).
const LAYOUT: &[(Category, usize, usize, &[&str], &[&str])] = &[
    (Category::ApiServer, 160, 30, &["apiserver", "apiserver_flowcontrol"],
        &["request", "response", "watch", "admission_webhook", "admission_controller", "audit_event", "storage_objects", "cache_list", "current_inflight", "registered_watchers", "longrunning", "init_events"]),
    (Category::Autoscaling, 60, 10, &["horizontal_pod_autoscaler", "keda_scaler"],
        &["desired_replicas", "current_replicas", "metric_value", "reconcile", "scaling_events"]),
    (Category::ClusterHealth, 180, 35, &["kube", "cluster"],
        &["deployment_status", "daemonset_status", "statefulset_status", "replicaset_status", "node_status", "namespace_status", "job_status", "cronjob_status", "endpoint_status", "service_info", "resourcequota", "lease"]),
    (Category::ControllerManager, 110, 15, &["workqueue", "controller_runtime"],
        &["adds", "depth", "queue", "work", "retries", "unfinished_work", "longest_running", "reconcile", "webhook"]),
    (Category::Dns, 50, 10, &["coredns"],
        &["dns_request", "dns_response", "cache", "forward", "health", "plugin", "reload"]),
    (Category::Etcd, 120, 25, &["etcd_server", "etcd_disk", "etcd_network", "etcd_mvcc"],
        &["proposals", "leader", "wal_fsync", "backend_commit", "peer", "client_grpc", "db_total_size", "snapshot"]),
    (Category::Ingress, 90, 15, &["nginx_ingress_controller", "haproxy_backend"],
        &["requests", "upstream", "ssl", "config_reload", "connections", "bytes_sent"]),
    (Category::Kubelet, 150, 25, &["kubelet", "kubelet_cgroup"],
        &["pleg_relist", "running_pods", "running_containers", "runtime_operations", "volume_stats", "eviction", "pod_start", "pod_worker", "certificate_manager", "node_config", "image_pull"]),
    (Category::Networking, 160, 30, &["node_network", "kubeproxy", "cilium"],
        &["receive", "transmit", "sync_proxy_rules", "conntrack", "drop", "forward", "policy", "endpoint"]),
    (Category::NodeHardware, 250, 30, &["node", "node_hwmon", "node_disk"],
        &["cpu", "memory", "filesystem", "load", "vmstat", "pressure", "thermal_zone", "io", "entropy", "boot", "context_switches", "interrupts"]),
    (Category::Observability, 170, 25, &["prometheus", "prometheus_tsdb", "alertmanager"],
        &["target_scrape", "rule_evaluation", "remote_storage", "head_series", "compaction", "notifications", "config", "sd_discovered", "query_engine", "wal_segment"]),
    (Category::PodContainer, 140, 30, &["container", "kube_pod"],
        &["cpu_usage", "memory_working_set", "fs_reads", "fs_writes", "network_receive", "network_transmit", "restarts", "oom_events", "spec_limits", "status_phase"]),
    (Category::Runtime, 70, 10, &["containerd", "crio"],
        &["image_pulls", "operations", "sandbox", "snapshotter", "runtime_tasks"]),
    (Category::Scheduler, 80, 15, &["scheduler", "scheduler_framework"],
        &["pending_pods", "schedule_attempts", "preemption", "queue_incoming", "plugin_execution", "binding"]),
    (Category::Security, 60, 10, &["authentication", "certmanager"],
        &["attempts", "token_cache", "certificate_expiration", "certificate_ready", "rbac_denials"]),
    (Category::Storage, 96, 15, &["kubelet_volume", "storage_operation", "csi_sidecar"],
        &["stats_capacity", "stats_used", "stats_inodes", "attach", "mount", "provision", "snapshot"]),
];

const MEASURES: &[(&str, MetricType)] = &[
    ("total", MetricType::Counter),
    ("duration_seconds", MetricType::Histogram),
    ("bytes", MetricType::Gauge),
    ("errors_total", MetricType::Counter),
    ("current", MetricType::Gauge),
    ("latency_seconds", MetricType::Histogram),
    ("ratio", MetricType::Gauge),
    ("operations_total", MetricType::Counter),
];

fn words(s: &str) -> String {
    s.replace('_', " ")
}

fn enumerate_category(
    category: Category,
    size: usize,
    high: usize,
    namespaces: &[&str],
    subsystems: &[&str],
    rules: &KeywordRules,
) -> Vec<MetricEntry> {
    let mut names = Vec::with_capacity(size);
    'outer: for (mi, (measure, ty)) in MEASURES.iter().enumerate() {
        for sub in subsystems {
            for ns in namespaces {
                if names.len() == size {
                    break 'outer;
                }
                names.push((format!("{ns}_{sub}_{measure}"), *ty, mi));
            }
        }
    }
    assert_eq!(names.len(), size, "{category}: enumeration too small");
    names.sort();
    // Spread High priority evenly over the sorted names.
    names
        .into_iter()
        .enumerate()
        .map(|(i, (name, metric_type, mi))| {
            let is_high = (i * high) / size != ((i + 1) * high) / size;
            let help = format!(
                "{} {} {}.",
                category.as_str().replace('_', " "),
                words(name.split_once('_').map(|(_, r)| r).unwrap_or(&name)),
                if mi % 2 == 0 { "observed by the exporter" } else { "reported per instance" }
            );
            MetricEntry {
                keywords: generate_keywords(&name, metric_type, &help, rules),
                name,
                metric_type,
                help,
                priority: if is_high { Priority::High } else { Priority::Medium },
                category,
            }
        })
        .collect()
}

/// Entries of the shipped `gpu_ai` category.
pub fn gpu_ai_entries(rules: &KeywordRules) -> Vec<MetricEntry> {
    GPU_AI
        .iter()
        .map(|(name, ty, pri, help)| MetricEntry {
            name: name.to_string(),
            metric_type: *ty,
            help: help.to_string(),
            priority: *pri,
            keywords: generate_keywords(name, *ty, help, rules),
            category: Category::GpuAi,
        })
        .collect()
}

/// The full 2,000-metric catalog.
pub fn full_catalog(rules: &KeywordRules) -> Catalog {
    let mut catalog = Catalog::empty();
    catalog.source_version = VERSION.to_string();
    for e in gpu_ai_entries(rules) {
        assert!(catalog.insert(e));
    }
    for (cat, size, high, ns, subs) in LAYOUT {
        for e in enumerate_category(*cat, *size, *high, ns, subs, rules) {
            assert!(catalog.insert(e), "duplicate synthetic name");
        }
    }
    catalog
}

/// A catalog and a live series-name list engineered so validation removes
/// 8 stale metrics and adopts 5 new ones: 1,995 − 8 + 5 = 1,992.
pub struct ValidationFixture {
    pub catalog: Catalog,
    pub live_names: Vec<String>,
    pub stale: Vec<String>,
    pub adopted: Vec<(String, Category)>,
}

pub fn validation_fixture(rules: &KeywordRules) -> ValidationFixture {
    let mut catalog = full_catalog(rules);
    // Five metrics the cluster's distribution never shipped.
    let dropped: Vec<String> = catalog
        .category(Category::Observability)
        .iter()
        .rev()
        .take(5)
        .map(|e| e.name.clone())
        .collect();
    for n in &dropped {
        catalog.remove(n);
    }
    // Eight metrics absent from the live cluster, spread over categories.
    let stale: Vec<String> = [
        Category::ApiServer,
        Category::ClusterHealth,
        Category::Etcd,
        Category::Kubelet,
        Category::Networking,
        Category::NodeHardware,
        Category::Scheduler,
        Category::Storage,
    ]
    .iter()
    .map(|c| catalog.category(*c)[3].name.clone())
    .collect();

    let adopted = vec![
        ("etcd_server_learner_promotes_total".to_string(), Category::Etcd),
        ("apiserver_request_sli_duration_seconds".to_string(), Category::ApiServer),
        ("coredns_proxy_conn_cache_hits_total".to_string(), Category::Dns),
        ("node_hwmon_fan_rpm".to_string(), Category::NodeHardware),
        ("zz_custom_exporter_up".to_string(), Category::Observability),
    ];

    let mut live_names: Vec<String> = catalog
        .entries()
        .filter(|e| !stale.contains(&e.name))
        .flat_map(|e| super::naming::family_series(&e.name, e.metric_type))
        .collect();
    live_names.extend(adopted.iter().map(|(n, _)| n.clone()));
    live_names.sort();
    ValidationFixture {
        catalog,
        live_names,
        stale,
        adopted,
    }
}

/// Series names a GPU node running DCGM and vLLM exposes, including a few
/// the shipped catalog does not know about.
pub fn gpu_live_names() -> Vec<String> {
    let mut names: Vec<String> = GPU_AI
        .iter()
        .flat_map(|(n, ty, _, _)| super::naming::family_series(n, *ty))
        .collect();
    names.extend(
        [
            "DCGM_FI_DEV_FB_TOTAL",
            "DCGM_FI_PROF_NVLINK_TX_BYTES",
            "DCGM_FI_PROF_NVLINK_RX_BYTES",
            "vllm:num_requests_swapped",
            "vllm:prefix_cache_hits_total",
        ]
        .map(String::from),
    );
    names.sort();
    names
}

/// Every series name the shipped Prometheus fixture exposes: the full
/// catalog's families plus the GPU node's series.
pub fn fixture_live_names(rules: &KeywordRules) -> Vec<String> {
    let catalog = full_catalog(rules);
    let mut names: Vec<String> = catalog
        .entries()
        .filter(|e| e.category != Category::GpuAi)
        .flat_map(|e| super::naming::family_series(&e.name, e.metric_type))
        .collect();
    names.extend(gpu_live_names());
    names.sort();
    names.dedup();
    names
}
