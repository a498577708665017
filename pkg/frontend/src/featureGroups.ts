/**
 * The 41 connection-record features in their conventional display groups
 * (basic connection fields, content inspection, short-window traffic,
 * destination-host traffic). Purely presentational: the server's record
 * payload is the source of truth for values.
 */

export const FEATURE_GROUPS: Record<string, string[]> = {
  basic: [
    'duration',
    'protocol_type',
    'service',
    'flag',
    'src_bytes',
    'dst_bytes',
    'land',
    'wrong_fragment',
    'urgent',
  ],
  content: [
    'hot',
    'num_failed_logins',
    'logged_in',
    'num_compromised',
    'root_shell',
    'su_attempted',
    'num_root',
    'num_file_creations',
    'num_shells',
    'num_access_files',
    'num_outbound_cmds',
    'is_host_login',
    'is_guest_login',
  ],
  time_traffic: [
    'count',
    'srv_count',
    'serror_rate',
    'srv_serror_rate',
    'rerror_rate',
    'srv_rerror_rate',
    'same_srv_rate',
    'diff_srv_rate',
    'srv_diff_host_rate',
  ],
  host_traffic: [
    'dst_host_count',
    'dst_host_srv_count',
    'dst_host_same_srv_rate',
    'dst_host_diff_srv_rate',
    'dst_host_same_src_port_rate',
    'dst_host_srv_diff_host_rate',
    'dst_host_serror_rate',
    'dst_host_srv_serror_rate',
    'dst_host_rerror_rate',
    'dst_host_srv_rerror_rate',
  ],
};

export const ALL_FEATURES: string[] = Object.values(FEATURE_GROUPS).flat();
