import pytest
import tempfile
import shutil
import re
from src.log.logger import Logger
import os


@pytest.fixture
def temp_log_dir():
    temp_dir = tempfile.mkdtemp()
    yield temp_dir
    shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def clean_env():
    original_log_file = os.environ.get("FRACRB_LOG_FILE")
    original_log_level = os.environ.get("FRACRB_LOG_LEVEL")

    if "FRACRB_LOG_FILE" in os.environ:
        del os.environ["FRACRB_LOG_FILE"]
    if "FRACRB_LOG_LEVEL" in os.environ:
        del os.environ["FRACRB_LOG_LEVEL"]

    yield

    for key, original in (("FRACRB_LOG_FILE", original_log_file), ("FRACRB_LOG_LEVEL", original_log_level)):
        if original is not None:
            os.environ[key] = original
        elif key in os.environ:
            del os.environ[key]


def read_log(path):
    with open(path, "r") as f:
        return f.read()


class TestLogger:
    def test_default_configuration(self, clean_env):
        logger = Logger()
        config = logger.get_config()

        assert config["log_file"] is None
        assert config["log_level"] == 0
        assert config["log_level_name"] == "SILENT"

    def test_environment_variable_reading(self, temp_log_dir, clean_env):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = "3"

        config = Logger().get_config()

        assert config["log_file"] == test_log_file
        assert config["log_level"] == 3
        assert config["log_level_name"] == "DEBUG"

    @pytest.mark.parametrize("invalid_level", ["invalid", "4", "-1", "10", "abc", ""])
    def test_invalid_log_level(self, invalid_level, clean_env):
        """Invalid levels fall back to silent"""
        os.environ["FRACRB_LOG_LEVEL"] = invalid_level
        assert Logger().log_level == 0

    def test_silent_level_logging(self, temp_log_dir, clean_env):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = "0"

        logger = Logger()
        logger.log_warning("This should not appear")
        logger.log_info("This should not appear")
        logger.log_debug("This should not appear")

        assert not os.path.exists(test_log_file)

    def test_warning_level_logging(self, temp_log_dir, clean_env):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = "1"

        logger = Logger()
        logger.log_warning("Warning message")
        logger.log_info("Info message")

        content = read_log(test_log_file)
        assert "WARNING: Warning message" in content
        assert "INFO: Info message" not in content

    def test_log_file_creation(self, temp_log_dir, clean_env):
        """Parent directories of the log file are created"""
        nested_log_path = os.path.join(temp_log_dir, "logs", "nested", "run.log")
        os.environ["FRACRB_LOG_FILE"] = nested_log_path
        os.environ["FRACRB_LOG_LEVEL"] = "2"

        Logger().log_info("Test message")

        assert os.path.isfile(nested_log_path)

    def test_log_appending(self, temp_log_dir, clean_env):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = "2"

        Logger().log_info("First message")
        Logger().log_info("Second message")

        content = read_log(test_log_file)
        assert "First message" in content
        assert "Second message" in content
        assert content.count("INFO:") == 2

    def test_timestamp_format(self, temp_log_dir, clean_env):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = "2"

        Logger().log_info("Test message")

        timestamp_pattern = r"\[\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}\] INFO: Test message"
        assert re.search(timestamp_pattern, read_log(test_log_file))

    def test_no_log_file_specified(self, clean_env):
        os.environ["FRACRB_LOG_LEVEL"] = "3"

        logger = Logger()
        logger.log_info("This should be ignored")
        logger.log_debug("This should also be ignored")

    def test_file_write_error_handling(self, temp_log_dir, clean_env):
        """A log path below a regular file cannot be created; logging stays silent"""
        blocker = os.path.join(temp_log_dir, "blocker")
        with open(blocker, "w") as f:
            f.write("")
        os.environ["FRACRB_LOG_FILE"] = os.path.join(blocker, "sub", "log.txt")
        os.environ["FRACRB_LOG_LEVEL"] = "2"

        Logger().log_info("This should fail silently")

    def test_timed_block(self, temp_log_dir, clean_env):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = "2"

        logger = Logger()
        with logger.timed("basis build"):
            pass

        assert re.search(r"INFO: basis build took \d+\.\d ms", read_log(test_log_file))

    def test_timed_block_logs_on_exception(self, temp_log_dir, clean_env):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = "2"

        logger = Logger()
        with pytest.raises(RuntimeError):
            with logger.timed("failing phase"):
                raise RuntimeError("boom")

        assert "failing phase took" in read_log(test_log_file)

    @pytest.mark.parametrize(
        "log_level,expected_warning,expected_info,expected_debug",
        [
            (0, False, False, False),  # Silent
            (1, True, False, False),  # Warnings only
            (2, True, True, False),  # Warnings and info
            (3, True, True, True),  # Everything
        ],
    )
    def test_logging_levels_comprehensive(
        self, temp_log_dir, clean_env, log_level, expected_warning, expected_info, expected_debug
    ):
        test_log_file = os.path.join(temp_log_dir, "test.log")
        os.environ["FRACRB_LOG_FILE"] = test_log_file
        os.environ["FRACRB_LOG_LEVEL"] = str(log_level)

        logger = Logger()
        logger.log_warning("Warning message")
        logger.log_info("Info message")
        logger.log_debug("Debug message")

        if not expected_warning:
            assert not os.path.exists(test_log_file)
            return

        content = read_log(test_log_file)
        assert ("WARNING: Warning message" in content) == expected_warning
        assert ("INFO: Info message" in content) == expected_info
        assert ("DEBUG: Debug message" in content) == expected_debug
