// Thin typed client over the service endpoints. Every number shown in the
// UI originates here or in the event stream; the client never computes
// balances on its own.

import type { Balance, BidResponse, CourseRow, DeclareResponse, PhaseInfo, Results } from './types'

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message)
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path)
    if (!response.ok) {
      throw new ApiError(response.status, await response.text())
    }
    return (await response.json()) as T
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    })
    if (!response.ok) {
      throw new ApiError(response.status, await response.text())
    }
    return (await response.json()) as T
  }

  phase(): Promise<PhaseInfo> {
    return this.get('/phase')
  }

  courses(): Promise<CourseRow[]> {
    return this.get('/courses')
  }

  balance(studentId: string): Promise<Balance> {
    return this.get(`/balance/${encodeURIComponent(studentId)}`)
  }

  async results(): Promise<Results | null> {
    try {
      return await this.get<Results>('/results')
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) return null // awaiting settlement
      throw err
    }
  }

  declare(studentId: string, credits: number): Promise<DeclareResponse> {
    return this.post('/declare', { student_id: studentId, credits })
  }

  bid(studentId: string, courseId: string, amount: number): Promise<BidResponse> {
    return this.post('/bids', { student_id: studentId, course_id: courseId, amount })
  }
}
