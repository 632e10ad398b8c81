import pytest

from dss_pipeline.config import CtgovConfig, FieldMapping
from dss_pipeline.ctgov import (
    CtgovClient,
    HarvestDestination,
    PageCursor,
    extract_dss,
)
from dss_pipeline.errors import (
    DestinationWriteError,
    MalformedDocumentError,
    MalformedResponseError,
    NetworkUnreachableError,
)
from dss_pipeline.labels import Label
from dss_pipeline.store import import_csv

from .helpers import registry_fixture, study_document
from .mock_registry import MockRegistry


def make_client(base_url, **overrides) -> CtgovClient:
    config = CtgovConfig(
        api_base=base_url,
        page_size=overrides.pop("page_size", 100),
        requests_per_second=0.0,  # no throttling inside tests
        retry_budget=overrides.pop("retry_budget", 5),
    )
    return CtgovClient(config, sleeper=lambda _seconds: None)


class TestExtractDss:
    def test_full_document(self):
        doc = study_document(
            "NCT03822728",
            category="NO",
            description=(
                "The investigators will make our participant data available to other "
                "researchers after completion of this study"
            ),
            first_posted="2019-02-04",
        )
        record = extract_dss(doc)
        assert record.nct_id == "NCT03822728"
        assert record.original_category is Label.NO
        assert record.dss_text.startswith("The investigators will make")
        assert record.first_posted_year == 2019

    def test_category_mapped_case_insensitively(self):
        doc = study_document("NCT03463993", category="YES", description="some statement")
        assert extract_dss(doc).original_category is Label.YES

    def test_missing_description_is_skipped(self):
        doc = study_document("NCT00000001", category="YES", description=None)
        assert extract_dss(doc) is None

    def test_missing_category_is_skipped(self):
        doc = study_document("NCT00000001", category=None, description="statement")
        assert extract_dss(doc) is None

    def test_unknown_category_value_is_skipped(self):
        doc = study_document("NCT00000001", category="MAYBE", description="statement")
        assert extract_dss(doc) is None

    def test_missing_identifier_raises(self):
        doc = {"protocolSection": {"ipdSharingStatementModule": {"ipdSharing": "YES"}}}
        with pytest.raises(MalformedDocumentError):
            extract_dss(doc)

    def test_missing_date_gives_year_zero(self):
        doc = study_document("NCT00000001", category="NO", description="statement", first_posted=None)
        assert extract_dss(doc).first_posted_year == 0

    def test_custom_field_mapping(self):
        mapping = FieldMapping(
            nct_id="id", category="sharing.flag", description="sharing.text", first_posted="posted"
        )
        doc = {"id": "NCT00000009", "sharing": {"flag": "undecided", "text": "words"}, "posted": "2021-07"}
        record = extract_dss(doc, mapping)
        assert record.original_category is Label.UNDECIDED
        assert record.first_posted_year == 2021

    def test_deterministic(self):
        doc = study_document("NCT00000002", category="YES", description="statement")
        assert extract_dss(doc) == extract_dss(doc)


class TestFetchPage:
    def test_empty_registry(self):
        with MockRegistry([]) as mock:
            client = make_client(mock.base_url)
            records, cursor = client.fetch_page(PageCursor(page_size=100))
            assert records == []
            assert cursor.token is None

    def test_three_pages_cover_the_fixture(self):
        studies = registry_fixture(total=250, missing_dss=10)
        with MockRegistry(studies) as mock:
            client = make_client(mock.base_url)
            pages = []
            cursor = PageCursor(page_size=100)
            while True:
                records, cursor = client.fetch_page(cursor)
                pages.append(records)
                if cursor.token is None:
                    break
            assert [len(p) for p in pages] == [100, 100, 50]
            fetched_ids = [d["protocolSection"]["identificationModule"]["nctId"] for p in pages for d in p]
            fixture_ids = [d["protocolSection"]["identificationModule"]["nctId"] for d in studies]
            assert fetched_ids == fixture_ids

    def test_retries_transient_500_then_succeeds(self):
        studies = registry_fixture(total=5, missing_dss=1)
        with MockRegistry(studies, failures={1: "500", 2: "500"}) as mock:
            client = make_client(mock.base_url)
            records, _ = client.fetch_page(PageCursor(page_size=100))
            assert len(records) == 5
            assert mock.request_count == 3

    def test_rate_limited_waits_and_retries(self):
        studies = registry_fixture(total=5, missing_dss=1)
        with MockRegistry(studies, failures={1: "429"}) as mock:
            client = make_client(mock.base_url)
            records, _ = client.fetch_page(PageCursor(page_size=100))
            assert len(records) == 5

    def test_budget_exhaustion_surfaces_network_error(self):
        failures = {i: "drop" for i in range(1, 10)}
        with MockRegistry([], failures=failures) as mock:
            client = make_client(mock.base_url, retry_budget=2)
            with pytest.raises(NetworkUnreachableError):
                client.fetch_page(PageCursor(page_size=10))
            assert mock.request_count == 3

    def test_malformed_response_is_not_retried(self):
        with MockRegistry([], failures={1: "not-json"}) as mock:
            client = make_client(mock.base_url)
            with pytest.raises(MalformedResponseError) as excinfo:
                client.fetch_page(PageCursor(page_size=10))
            assert "<html>" in excinfo.value.payload_excerpt
            assert mock.request_count == 1

    def test_missing_studies_key_is_malformed(self):
        with MockRegistry([], failures={1: "no-studies"}) as mock:
            client = make_client(mock.base_url)
            with pytest.raises(MalformedResponseError) as excinfo:
                client.fetch_page(PageCursor(page_size=10))
            assert excinfo.value.payload_excerpt

    def test_env_var_overrides_base_url(self, monkeypatch):
        with MockRegistry(registry_fixture(total=3, missing_dss=1)) as mock:
            monkeypatch.setenv("CTGOV_API_BASE", mock.base_url)
            client = CtgovClient(CtgovConfig(api_base="http://unreachable.invalid"),
                                 sleeper=lambda _s: None)
            records, _ = client.fetch_page(PageCursor(page_size=10))
            assert len(records) == 3

    def test_page_size_validation(self):
        with pytest.raises(ValueError):
            PageCursor(page_size=0)
        with pytest.raises(ValueError):
            PageCursor(page_size=1001)


class TestHarvest:
    def test_mock_fixture_counts(self, tmp_path):
        studies = registry_fixture(total=10, missing_dss=3)
        with MockRegistry(studies) as mock:
            client = make_client(mock.base_url)
            destination = HarvestDestination(tmp_path / "corpus.csv")
            summary = client.harvest(destination)
        assert summary.as_dict() == {"fetched": 10, "kept": 7, "skipped": 3}
        assert len(import_csv(tmp_path / "corpus.csv")) == 7

    def test_fetched_equals_kept_plus_skipped(self, tmp_path):
        studies = registry_fixture(total=137, missing_dss=29)
        with MockRegistry(studies) as mock:
            client = make_client(mock.base_url, page_size=50)
            summary = client.harvest(HarvestDestination(tmp_path / "c.csv"))
        assert summary.fetched == summary.kept + summary.skipped == 137

    def test_max_records_zero_writes_nothing(self, tmp_path):
        with MockRegistry(registry_fixture(total=5, missing_dss=1)) as mock:
            client = make_client(mock.base_url)
            path = tmp_path / "corpus.csv"
            summary = client.harvest(HarvestDestination(path), max_records=0)
        assert summary.as_dict() == {"fetched": 0, "kept": 0, "skipped": 0}
        assert not path.exists()
        assert mock.request_count == 0

    def test_max_records_caps_fetches(self, tmp_path):
        studies = registry_fixture(total=100, missing_dss=10)
        with MockRegistry(studies) as mock:
            client = make_client(mock.base_url, page_size=30)
            summary = client.harvest(HarvestDestination(tmp_path / "c.csv"), max_records=45)
        assert summary.fetched == 45

    def test_idempotent_on_fixed_registry(self, tmp_path):
        studies = registry_fixture(total=60, missing_dss=7)
        with MockRegistry(studies) as mock:
            client = make_client(mock.base_url, page_size=25)
            client.harvest(HarvestDestination(tmp_path / "a.csv"))
            client.harvest(HarvestDestination(tmp_path / "b.csv"))
        assert import_csv(tmp_path / "a.csv") == import_csv(tmp_path / "b.csv")

    def test_pagination_completeness_no_dupes_no_omissions(self, tmp_path):
        studies = registry_fixture(total=83, missing_dss=9)
        with MockRegistry(studies) as mock:
            client = make_client(mock.base_url, page_size=20)
            client.harvest(HarvestDestination(tmp_path / "c.csv"))
        harvested = {r.nct_id for r in import_csv(tmp_path / "c.csv")}
        expected = {
            d["protocolSection"]["identificationModule"]["nctId"]
            for d in studies
            if "description" in d["protocolSection"].get("ipdSharingStatementModule", {})
        }
        assert harvested == expected

    def test_interruption_persists_cursor_then_resume_matches(self, tmp_path):
        studies = registry_fixture(total=100, missing_dss=10)
        path = tmp_path / "corpus.csv"

        class FailingDestination(HarvestDestination):
            def __init__(self, *args, fail_after_pages=2, **kwargs):
                super().__init__(*args, **kwargs)
                self.pages = 0
                self.fail_after_pages = fail_after_pages

            def append_page(self, records):
                self.pages += 1
                if self.pages > self.fail_after_pages:
                    raise DestinationWriteError("disk full (injected)")
                return super().append_page(records)

        with MockRegistry(studies) as mock:
            client = make_client(mock.base_url, page_size=20)
            with pytest.raises(DestinationWriteError):
                client.harvest(FailingDestination(path, fail_after_pages=2))
            assert (tmp_path / "corpus.csv.cursor").exists()
            partial = {r.nct_id for r in import_csv(path)}

            resumed = client.harvest(HarvestDestination(path, resume=True))
            final = import_csv(path)
            assert not (tmp_path / "corpus.csv.cursor").exists()

            reference_dest = HarvestDestination(tmp_path / "reference.csv")
            client.harvest(reference_dest)
            reference = import_csv(tmp_path / "reference.csv")

        assert {r.nct_id for r in final} == {r.nct_id for r in reference}
        assert sorted(final, key=lambda r: r.nct_id) == sorted(reference, key=lambda r: r.nct_id)
        assert partial < {r.nct_id for r in final}
        assert resumed.fetched == resumed.kept + resumed.skipped
