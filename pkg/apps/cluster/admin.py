from django.contrib import admin

from .models import ClusterConfig, ExperimentRun, Organization, StorageNode


class OrganizationInline(admin.TabularInline):
    model = Organization
    extra = 0


class StorageNodeInline(admin.TabularInline):
    model = StorageNode
    extra = 0


@admin.register(ClusterConfig)
class ClusterConfigAdmin(admin.ModelAdmin):
    list_display = ("name", "channel", "n", "k", "l", "x", "y", "chunk_size", "created_at")
    readonly_fields = ("source", "created_at", "updated_at")
    inlines = [OrganizationInline]


@admin.register(Organization)
class OrganizationAdmin(admin.ModelAdmin):
    list_display = ("name", "cluster")
    list_filter = ("cluster",)
    inlines = [StorageNodeInline]


@admin.register(StorageNode)
class StorageNodeAdmin(admin.ModelAdmin):
    list_display = ("name", "organization", "role", "bandwidth", "capacity", "alive")
    list_filter = ("role", "alive", "organization")
    search_fields = ("name",)


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ("id", "kind", "status", "trials", "created_at", "finished_at")
    list_filter = ("kind", "status")
    readonly_fields = ("csv", "error", "parameters")
