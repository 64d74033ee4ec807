/** English/Arabic label table. English is the shipped default; every key
 * must exist in both languages so switching can never half-translate a
 * view. */

export type Lang = "en" | "ar";

const TABLE = {
  en: {
    app_title: "CryptoHalal",
    search_placeholder: "Ticker or coin name",
    search_button: "Search",
    search_empty_query: "Enter a ticker or coin name first.",
    verdict_halal: "Halal",
    verdict_haram: "Haram",
    badge_machine: "machine verdict",
    badge_scholar: "scholar verdict",
    confidence: "Confidence",
    revision: "Revision",
    cached: "from stored ruling",
    triggered_features: "Triggered features",
    no_triggered_features: "No features triggered.",
    warning_low_evidence:
      "Low evidence: the source page matched no known feature patterns.",
    warning_high_priority:
      "Most triggered features are high-priority concerns.",
    evidence_times: "matches",
    not_found_title: "No stored ruling",
    not_found_confirm: "classify now?",
    classify_confirm_button: "Classify",
    classify_cancel_button: "Cancel",
    error_network: "Could not reach the service.",
    error_retry: "Retry",
    error_source_unavailable: "source site unavailable",
    browse_title: "All rulings",
    browse_col_ticker: "Ticker",
    browse_col_name: "Name",
    browse_col_verdict: "Verdict",
    browse_col_provenance: "Source",
    browse_col_revision: "Rev",
    browse_col_updated: "Updated",
    browse_next: "Next page",
    browse_empty: "No rulings stored yet.",
    login_title: "Scholar login",
    login_id: "Scholar ID",
    login_password: "Password",
    login_button: "Log in",
    login_failed: "Bad credentials.",
    logout_button: "Log out",
    session_expired: "Session expired; your draft is kept. Log in again.",
    editor_title: "Edit ruling",
    editor_verdict: "Verdict",
    editor_verdict_text: "Ruling text",
    editor_features: "Features",
    editor_save: "Save",
    editor_saved: "Saved as revision",
    priority_High: "High priority",
    priority_Low: "Low priority",
    priority_Neutral: "Neutral",
  },
  ar: {
    app_title: "كريبتو حلال",
    search_placeholder: "رمز العملة أو اسمها",
    search_button: "بحث",
    search_empty_query: "أدخل رمز العملة أو اسمها أولاً.",
    verdict_halal: "حلال",
    verdict_haram: "حرام",
    badge_machine: "حكم آلي",
    badge_scholar: "حكم شرعي",
    confidence: "درجة الثقة",
    revision: "المراجعة",
    cached: "من حكم مخزن",
    triggered_features: "الخصائص المكتشفة",
    no_triggered_features: "لم تُكتشف أي خصائص.",
    warning_low_evidence: "أدلة قليلة: لم تطابق صفحة المصدر أي نمط معروف.",
    warning_high_priority: "معظم الخصائص المكتشفة ذات أولوية عالية.",
    evidence_times: "مطابقات",
    not_found_title: "لا يوجد حكم مخزن",
    not_found_confirm: "هل تريد التصنيف الآن؟",
    classify_confirm_button: "تصنيف",
    classify_cancel_button: "إلغاء",
    error_network: "تعذر الوصول إلى الخدمة.",
    error_retry: "إعادة المحاولة",
    error_source_unavailable: "موقع المصدر غير متاح",
    browse_title: "جميع الأحكام",
    browse_col_ticker: "الرمز",
    browse_col_name: "الاسم",
    browse_col_verdict: "الحكم",
    browse_col_provenance: "المصدر",
    browse_col_revision: "مراجعة",
    browse_col_updated: "آخر تحديث",
    browse_next: "الصفحة التالية",
    browse_empty: "لا توجد أحكام مخزنة بعد.",
    login_title: "دخول العلماء",
    login_id: "معرف العالم",
    login_password: "كلمة المرور",
    login_button: "تسجيل الدخول",
    login_failed: "بيانات اعتماد خاطئة.",
    logout_button: "تسجيل الخروج",
    session_expired: "انتهت الجلسة؛ تم حفظ المسودة. سجل الدخول مجدداً.",
    editor_title: "تعديل الحكم",
    editor_verdict: "الحكم",
    editor_verdict_text: "نص الحكم",
    editor_features: "الخصائص",
    editor_save: "حفظ",
    editor_saved: "حُفظ بالمراجعة",
    priority_High: "أولوية عالية",
    priority_Low: "أولوية منخفضة",
    priority_Neutral: "محايدة",
  },
} as const;

export type StringKey = keyof (typeof TABLE)["en"];

let current: Lang = "en";

export function setLang(lang: Lang): void {
  current = lang;
}

export function getLang(): Lang {
  return current;
}

export function t(key: StringKey): string {
  return TABLE[current][key];
}

/** Both tables cover the same keys; exported for the test that proves it. */
export function tableKeys(lang: Lang): string[] {
  return Object.keys(TABLE[lang]).sort();
}
