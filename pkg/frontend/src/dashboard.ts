/**
 * Dashboard state: latest metrics/model/nodes snapshots plus the derived
 * retrain-button and version-convergence indicators.
 */

import type { MetricsView, ModelView, NodesView } from './types.js';

export interface NodeBadge {
  node_id: string;
  source: string;
  applied_version: number;
  converged: boolean;
}

export class DashboardStore {
  metrics: MetricsView | null = null;
  model: ModelView | null = null;
  nodes: NodesView | null = null;
  /** Set when POST /retrain answered 409; cleared by the next model poll. */
  retrainRejected = false;

  absorbMetrics(view: MetricsView): void {
    this.metrics = view;
  }

  absorbModel(view: ModelView): void {
    this.model = view;
    if (!view.retrain_running) this.retrainRejected = false;
  }

  absorbNodes(view: NodesView): void {
    this.nodes = view;
  }

  get modelVersion(): number | null {
    return this.model ? this.model.version : null;
  }

  get retrainRunning(): boolean {
    return this.retrainRejected || (this.model !== null && this.model.retrain_running);
  }

  /** Per-monitor badges; converged means the node runs the base version. */
  nodeBadges(): NodeBadge[] {
    if (!this.nodes) return [];
    const base = this.nodes.base_version;
    return this.nodes.nodes.map((n) => ({
      node_id: n.node_id,
      source: n.source,
      applied_version: n.applied_version,
      converged: n.applied_version === base,
    }));
  }

  get allConverged(): boolean {
    const badges = this.nodeBadges();
    return badges.length > 0 && badges.every((b) => b.converged);
  }

  get isZeroState(): boolean {
    return this.metrics !== null && this.metrics.rows.length === 0;
  }

  detectionRateText(): string {
    if (!this.metrics) return '—';
    const rate = this.metrics.known_attack_detection_rate;
    return rate === null ? '—' : `${(rate * 100).toFixed(1)}%`;
  }

  falseAlarmText(): string {
    if (!this.metrics) return '—';
    const rate = this.metrics.false_alarm_rate;
    if (rate === null) {
      return `${this.metrics.false_alarm_count} false alarms (rate n/a)`;
    }
    return `${(rate * 100).toFixed(1)}%`;
  }
}
