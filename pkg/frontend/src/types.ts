/**
 * View models mirroring the central HTTP API payloads, field for field.
 * The console never reshapes server data beyond display concerns.
 */

export type AlarmStatus = 'pending' | 'confirmed_attack' | 'false_alarm';
export type Decision = 'confirmed_attack' | 'false_alarm';
export type AlarmSource = 'netlan' | 'honeypot';

export interface AlarmRow {
  alarm_id: string;
  source: AlarmSource;
  node_id: string;
  timestamp: number;
  score: number;
  model_version_used: number;
  status: AlarmStatus;
}

export interface AlarmListResponse {
  alarms: AlarmRow[];
  evidence_count: number;
}

export interface RecordLabel {
  kind: 'attack' | 'normal';
  name?: string;
  category?: string;
}

/** Raw 41-feature record plus its label, keyed by feature name. */
export type RecordPayload = Record<string, number | string | RecordLabel> & {
  label: RecordLabel;
};

export interface SymbolSlot {
  symbol: string;
  in_vocabulary: boolean;
}

export interface AlarmDetail extends AlarmRow {
  record: RecordPayload;
  encoded: Record<string, SymbolSlot>;
  feature_groups: Record<string, string[]>;
}

export interface VerdictResponse extends AlarmRow {
  evidence_count: number;
}

export interface MetricsRow {
  name: string;
  vectors: number;
  detected: number;
  detection_rate: number | null;
  new: boolean;
}

export interface MetricsView {
  rows: MetricsRow[];
  new_attack_names: string[];
  known_vectors: number;
  known_detected: number;
  new_vectors: number;
  new_detected: number;
  known_attack_detection_rate: number | null;
  new_attack_detection_rate: number | null;
  normal_vectors: number;
  false_alarm_count: number;
  false_alarm_rate: number | null;
  not_detected_attacks: number;
  model_version: number;
}

export interface ModelView {
  version: number;
  kind: string;
  manifest: Record<string, unknown>;
  retrain_running: boolean;
}

export interface NodeEntry {
  node_id: string;
  source: string;
  applied_version: number;
}

export interface NodesView {
  nodes: NodeEntry[];
  base_version: number;
}

export interface RetrainResponse {
  status: string;
  version_before: number;
}
