"""Built-in catalog of sharing standards and their leaking fields.

Field names printed with a namespace prefix (``cce:``, ``xpil:``, ``maecBundle:``)
are stored by local name. Names printed with a type or parent prefix
(``Submission:``, ``AnalysisType:``, ``ContributorType:``) become a two-segment
pattern under that parent element, and grouped listings expand to one pattern
per leaf. Attribute-valued fields use ``@``.
"""

STANDARDS = [
    # (id, name, category, description)
    ("cve", "Common Vulnerability Exposure", "enumeration",
     "Public identifiers for known vulnerabilities."),
    ("cwe", "Common Weakness Enumeration", "enumeration",
     "Catalog of software weakness types."),
    ("capec", "Common Attack Pattern Enumeration and Classification", "enumeration",
     "Catalog of attack patterns."),
    ("cce", "Common Configuration Enumeration", "enumeration",
     "Identifiers for system configuration settings."),
    ("cpe", "Common Platform Enumeration", "enumeration",
     "Naming scheme for hardware, operating systems and software products."),
    ("cvss", "Common Vulnerability Scoring System", "scoring-system",
     "Numeric severity rating for vulnerabilities."),
    ("cwss", "Common Weakness Scoring System", "scoring-system",
     "Prioritization score for software weaknesses."),
    ("maec", "Malware Attribute Enumeration and Characterization", "language",
     "Structured encoding of malware properties and observed behavior."),
    ("oval", "Open Vulnerability and Assessment Language", "language",
     "Definitions and results of system state checks."),
    ("iodef", "Incident Object Description Exchange Format", "language",
     "Data model for exchanging security incident reports."),
    ("xccdf", "Extensible Configuration Checklist Description Format", "language",
     "Encoding for security benchmarks and their test results."),
    ("stix", "Structured Threat Information Exchange", "language",
     "Data model for threat intelligence such as campaigns, indicators and actors."),
    ("cee", "Common Event Expression", "language",
     "Vocabulary and syntax for log event records."),
    ("cybox", "Cyber Observable Expression", "language",
     "Vocabulary for observable host and network artifacts."),
    ("rid", "Real-time Inter-network Defense", "transport",
     "Messaging protocol carrying incident reports between response teams."),
    ("taxii", "Trusted Automated eXchange of Indicator Information", "transport",
     "Services and message exchanges for moving threat intelligence."),
    ("soap", "Simple Object Access Protocol", "transport",
     "XML messaging envelope used by web services."),
    ("repute", "Reputation Services (Repute, DKIM)", "transport",
     "Query interfaces for reputation data about identifiers."),
]

# Published per-standard totals under the 0/1/2/4 weighting.
TABLE_SCORES = {
    "cve": 1, "cwe": 1, "capec": 10, "cce": 4, "cpe": 3, "cvss": 0, "cwss": 0,
    "oval": 20, "xccdf": 38, "maec": 26, "cee": 15, "iodef": 19, "stix": 36,
    "cybox": 65,
}

CYBOX_NOTE = (
    "Published total is 65 while the accompanying discussion quotes 56; the printed "
    "field lists give neither (9 PII + 16 sensitive fields = 68 under 0/1/2/4)."
)

FLAGS = {"cybox": ("inconsistent-source",)}
NOTES = {"cybox": CYBOX_NOTE}

RULES = {
    "cve": {"inference": ["CVE-ID"]},
    "cwe": {"inference": ["CWE-ID"]},
    "capec": {
        "sensitive": ["Submission/Source", "Submission/Organization", "Submission/Date"],
        "inference": ["Relationship/ViewID", "Relationship/TargetForm",
                      "Relationship/Nature", "Relationship/TargetID"],
    },
    "cce": {
        "sensitive": ["modified_reference"],
        "inference": ["cce_id", "platform"],
    },
    "cpe": {
        "sensitive": ["title"],
        "inference": ["platform_id"],
    },
    "cvss": {},
    "cwss": {},
    "oval": {
        "pii": ["contributor"],
        "sensitive": ["timestamp", "submitted/@date", "status_change", "affected/@family",
                      "platform", "title", "description"],
        "inference": ["definition", "reference"],
    },
    "xccdf": {
        "pii": ["Benchmark/metadata", "TestResult/identity"],
        "sensitive": ["platform-specification", "platform", "status",
                      "TestResult/organization", "TestResult/profile", "TestResult/target",
                      "TestResult/target-address", "TestResult/target-facts",
                      "TestResult/target-id-ref", "TestResult/@start-time",
                      "TestResult/@end-time", "target-facts/fact"],
        "inference": ["affected/@family", "affected/platform", "benchmarkIdType",
                      "@resolved", "identity/@authenticated", "identity/@privileged"],
    },
    "maec": {
        "pii": ["Comment/@author"],
        # complete_datetime is printed twice in the source listing; stored once.
        "sensitive": ["Raw_Artifact", "Configuration_Parameter",
                      "Configuration_Parameter/Name", "Configuration_Parameter/Value",
                      "Collections/@timestamp", "Analysis/@start_datetime",
                      "Analysis/@complete_datetime", "Analysis/@lastupdate_datetime",
                      "Analysis/Comments", "Comment/@timestamp"],
        "inference": ["Action", "CVE"],
    },
    "cee": {
        "sensitive": ["time", "host", "dst", "ipv4", "ipv6", "src", "port"],
        "inference": ["status"],
    },
    "iodef": {
        "pii": ["Contact", "IncidentSource"],
        "sensitive": ["DetectTime", "StartTime", "EndTime", "ReportTime"],
        "inference": ["Assessment", "IncidentID", "AlternativeID"],
    },
    "stix": {
        "pii": ["Identity", "Specification", "PersonName", "Name", "Address",
                "ElectronicAddressIdentifier", "ContactNumber"],
        "sensitive": ["@timestamp", "OrganizationInfo", "OrganisationName",
                      "Nationalities/Country/NameElement"],
    },
    "cybox": {
        "pii": ["Recipient", "From", "Address_Value", "Raw_Header", "Contributors",
                "Contributor/Role", "Contributor/Name", "Contributor/Email",
                "Contributor/Phone"],
        "sensitive": ["HTTPSession/Value", "URI/Value", "Port_Value", "Raw_Artifact",
                      "Header/Date", "Subject", "Issuer", "Time/Start_Time",
                      "Time/End_Time", "Time/Produced_Time", "Time/Received_Time",
                      "Observation_Location", "Observable_Location",
                      "Contributor/Organization", "Contributor/Date",
                      "Contributor/Contribution_Location"],
    },
}

# Cross-standard host attributes highlighted in the annotated worm report
# (target address, service port, record timestamp). They apply to every
# document but belong to no standard's schema total.
UNIVERSAL_RULES = {
    "sensitive": ["Node/Address", "Service/Port", "RecordData/DateTime"],
}
