// Wire types for the course-selection service.

export type Phase =
  | 'Unopened'
  | 'Preparation'
  | 'Voting'
  | 'AwaitingSettlement'
  | 'Settled'

export interface PhaseInfo {
  phase: Phase
  now: number
  epoch_id: string | null
  voting_open: number | null
  voting_close: number | null
}

export interface CourseRow {
  course_id: string
  title: string
  credits: number
  capacity: number
  slots: string
  total_tokens: number
}

export interface Balance {
  student_id: string
  epoch_id: string | null
  minted: number
  spent: number
  remaining: number
}

export interface BidResponse {
  accepted: boolean
  reason: string
  balance: number
}

export interface DeclareResponse {
  student_id: string
  epoch_id: string
  declared_credits: number
  minted_tokens: number
  balance: number
}

export interface AwardRow {
  student_id: string
  course_id: string
  round: 'primary' | 'fallback'
}

export interface Results {
  epoch_id: string
  awards: AwardRow[]
  per_student_credits: Record<string, number>
  declared_credits: Record<string, number>
  unfilled: Record<string, number>
}

export type EventKind =
  | 'PhaseChanged'
  | 'DeclarationRecorded'
  | 'BidRecorded'
  | 'CourseTotalsChanged'
  | 'Settled'

export interface ServerEvent {
  kind: EventKind
  seq: number
  payload: Record<string, unknown>
}
